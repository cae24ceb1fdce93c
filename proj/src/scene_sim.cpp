#include "sweepalign/scene_sim.hpp"

#include <array>
#include <cmath>
#include <string>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

struct ClassTemplate {
    ObjectClass cls;
    Vec3 size;
    double speed_cap;  // m/s
};

// Typical nuScenes box sizes (l, w, h).
const std::array<ClassTemplate, 6> kTemplates = {{
    {ObjectClass::Car, Vec3(4.6, 1.95, 1.7), 1e9},
    {ObjectClass::Truck, Vec3(6.9, 2.5, 2.9), 1e9},
    {ObjectClass::Bus, Vec3(11.0, 2.9, 3.5), 1e9},
    {ObjectClass::Pedestrian, Vec3(0.75, 0.7, 1.75), 2.0},
    {ObjectClass::Bicycle, Vec3(1.75, 0.6, 1.3), 6.0},
    {ObjectClass::Motorcycle, Vec3(2.1, 0.8, 1.5), 1e9},
}};

void require(bool ok, const char* field, const char* rule) {
    if (!ok) {
        throw InvalidArgument(std::string("ScenarioConfig.") + field + ": " + rule);
    }
}

bool fits_in_range(const Box3D& box, double range) {
    for (const Vec2& c : box.bev_corners()) {
        if (std::abs(c.x()) > range || std::abs(c.y()) > range) {
            return false;
        }
    }
    return true;
}

}  // namespace

void ScenarioConfig::validate() const {
    require(num_sweeps >= 1, "num_sweeps", "must be >= 1");
    require(std::isfinite(sweep_period) && sweep_period > 0.0, "sweep_period", "must be > 0");
    require(num_objects >= 0, "num_objects", "must be >= 0");
    require(std::isfinite(min_object_speed) && min_object_speed >= 0.0, "min_object_speed",
            "must be >= 0");
    require(std::isfinite(max_object_speed) && max_object_speed >= min_object_speed,
            "max_object_speed", "must be >= min_object_speed");
    require(std::isfinite(max_yaw_rate) && max_yaw_rate >= 0.0, "max_yaw_rate", "must be >= 0");
    require(std::isfinite(ego_speed) && ego_speed >= 0.0, "ego_speed", "must be >= 0");
    require(std::isfinite(ego_yaw_rate), "ego_yaw_rate", "must be finite");
    require(points_per_object_per_sweep >= 0, "points_per_object_per_sweep", "must be >= 0");
    require(background_points_per_sweep >= 0, "background_points_per_sweep", "must be >= 0");
    require(std::isfinite(xy_range) && xy_range > 0.0, "xy_range", "must be > 0");
    require(std::isfinite(ground_z), "ground_z", "must be finite");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise_sigma", "must be >= 0");
    for (const ObjectSpec& spec : objects) {
        require(spec.size.allFinite() && (spec.size.array() > 0.0).all(), "objects.size",
                "components must be > 0");
        require(std::isfinite(spec.speed) && spec.speed >= 0.0, "objects.speed", "must be >= 0");
        require(std::isfinite(spec.x) && std::isfinite(spec.y) && std::isfinite(spec.yaw) &&
                    std::isfinite(spec.yaw_rate),
                "objects", "pose and yaw rate must be finite");
    }
}

Box3D ObjectTrajectory::box_at(int k) const {
    if (k < 0 || k >= static_cast<int>(poses.size())) {
        throw OutOfRange("ObjectTrajectory::box_at: k out of range");
    }
    const RigidTransform& pose = poses[static_cast<std::size_t>(k)];
    Box3D box;
    box.center = pose.translation();
    box.size = size;
    box.yaw = normalize_angle(pose.yaw());
    box.cls = cls;
    box.object_id = object_id;
    return box;
}

const ObjectTrajectory& SequenceSample::trajectory(int object_id) const {
    for (const ObjectTrajectory& traj : trajectories) {
        if (traj.object_id == object_id) {
            return traj;
        }
    }
    throw InvalidArgument("unknown instance id " + std::to_string(object_id));
}

RigidTransform constant_turn_pose(const RigidTransform& start, double speed, double yaw_rate,
                                  double dt) {
    const double turn = yaw_rate * dt;
    double dx = speed * dt;
    double dy = 0.0;
    if (std::abs(yaw_rate) > 1e-12) {
        dx = speed / yaw_rate * std::sin(turn);
        dy = speed / yaw_rate * (1.0 - std::cos(turn));
    }
    return start * RigidTransform::from_yaw(turn, Vec3(dx, dy, 0.0));
}

std::vector<Vec3> sample_cuboid_surface(const Vec3& size, int count, std::mt19937_64& rng) {
    const double l = size.x();
    const double w = size.y();
    const double h = size.z();
    // Face pairs: +-x (w*h), +-y (l*h), +-z (l*w).
    const std::array<double, 3> areas = {w * h, l * h, l * w};
    std::discrete_distribution<int> pick_axis(areas.begin(), areas.end());
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    std::bernoulli_distribution pick_side(0.5);

    std::vector<Vec3> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int axis = pick_axis(rng);
        Vec3 p(unit(rng) * l, unit(rng) * w, unit(rng) * h);
        const double sign = pick_side(rng) ? 0.5 : -0.5;
        p[axis] = sign * size[axis];
        samples.push_back(p);
    }
    return samples;
}

RigidTransform object_pose_at(const ObjectTrajectory& trajectory, double k) {
    const auto count = static_cast<double>(trajectory.poses.size());
    if (!(k >= 0.0 && k <= count - 1.0)) {
        throw OutOfRange("object_pose_at: k out of range");
    }
    const double lower = std::floor(k);
    const auto lo = static_cast<std::size_t>(lower);
    if (k == lower) {
        return trajectory.poses[lo];
    }
    return interpolate_pose(trajectory.poses[lo], trajectory.poses[lo + 1], k - lower);
}

SequenceSample generate_sequence(const ScenarioConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);

    std::vector<ObjectSpec> specs = config.objects;
    if (specs.empty() && config.num_objects > 0) {
        std::uniform_int_distribution<std::size_t> pick_class(0, kTemplates.size() - 1);
        std::uniform_real_distribution<double> heading(-kPi, kPi);
        std::uniform_real_distribution<double> speed(config.min_object_speed,
                                                     config.max_object_speed);
        std::uniform_real_distribution<double> yaw_rate(-config.max_yaw_rate, config.max_yaw_rate);
        std::vector<Box3D> placed;
        constexpr int kMaxAttempts = 200;
        for (int i = 0; i < config.num_objects; ++i) {
            for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
                const ClassTemplate& tpl = kTemplates[pick_class(rng)];
                const double margin = 0.5 * tpl.size.head<2>().norm();
                if (margin >= config.xy_range) {
                    continue;
                }
                std::uniform_real_distribution<double> coord(-config.xy_range + margin,
                                                             config.xy_range - margin);
                ObjectSpec spec;
                spec.cls = tpl.cls;
                spec.size = tpl.size;
                spec.x = coord(rng);
                spec.y = coord(rng);
                spec.yaw = heading(rng);
                spec.speed = std::min(speed(rng), tpl.speed_cap);
                spec.yaw_rate = yaw_rate(rng);
                if (spec.speed == 0.0) {
                    spec.yaw_rate = 0.0;  // parked objects do not spin in place
                }

                Box3D box;
                box.center = Vec3(spec.x, spec.y, 0.0);
                box.size = spec.size;
                box.yaw = spec.yaw;
                bool free = fits_in_range(box, config.xy_range);
                for (const Box3D& other : placed) {
                    free = free && bev_intersection_area(box, other) == 0.0;
                }
                if (free) {
                    placed.push_back(box);
                    specs.push_back(spec);
                    break;
                }
            }
        }
    }

    const std::size_t bg_count = static_cast<std::size_t>(config.background_points_per_sweep);
    const std::size_t obj_count = static_cast<std::size_t>(config.points_per_object_per_sweep);
    if (bg_count == 0 && (specs.empty() || obj_count == 0)) {
        throw EmptySceneError("generate_sequence: scene has no objects and no background points");
    }

    SequenceSample sample;
    sample.config = config;
    const int num_sweeps = config.num_sweeps;

    std::vector<RigidTransform> ego_poses;
    ego_poses.reserve(static_cast<std::size_t>(num_sweeps));
    for (int k = 0; k < num_sweeps; ++k) {
        ego_poses.push_back(constant_turn_pose(RigidTransform::identity(), config.ego_speed,
                                               config.ego_yaw_rate, -k * config.sweep_period));
    }

    std::vector<std::vector<Vec3>> body_samples;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const ObjectSpec& spec = specs[i];
        ObjectTrajectory traj;
        traj.object_id = static_cast<int>(i);
        traj.cls = spec.cls;
        traj.size = spec.size;
        const RigidTransform keyframe_pose = RigidTransform::from_yaw(
            spec.yaw, Vec3(spec.x, spec.y, config.ground_z + 0.5 * spec.size.z()));
        for (int k = 0; k < num_sweeps; ++k) {
            traj.poses.push_back(constant_turn_pose(keyframe_pose, spec.speed, spec.yaw_rate,
                                                    -k * config.sweep_period));
        }
        sample.keyframe_boxes.push_back(traj.box_at(0));
        sample.trajectories.push_back(std::move(traj));
        body_samples.push_back(sample_cuboid_surface(spec.size, static_cast<int>(obj_count), rng));
    }

    std::vector<Vec3> background;
    background.reserve(bg_count);
    {
        std::uniform_real_distribution<double> coord(-config.xy_range, config.xy_range);
        for (std::size_t i = 0; i < bg_count; ++i) {
            const double x = coord(rng);
            const double y = coord(rng);
            background.emplace_back(x, y, config.ground_z);
        }
    }

    std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);
    auto add_noise = [&](Vec3 p) {
        if (config.noise_sigma > 0.0) {
            p += Vec3(noise(rng), noise(rng), noise(rng));
        }
        return p;
    };

    sample.sweeps.resize(static_cast<std::size_t>(num_sweeps));
    for (int k = 0; k < num_sweeps; ++k) {
        SweepRecord& sweep = sample.sweeps[static_cast<std::size_t>(k)];
        sweep.k = k;
        sweep.ego_pose = ego_poses[static_cast<std::size_t>(k)];
        const RigidTransform world_to_ego = sweep.ego_pose.inverse();
        sweep.points.reserve(specs.size() * obj_count + bg_count);
        sweep.source_ids.reserve(specs.size() * obj_count + bg_count);
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const RigidTransform ego_from_body =
                world_to_ego * sample.trajectories[i].poses[static_cast<std::size_t>(k)];
            for (const Vec3& b : body_samples[i]) {
                sweep.points.push_back(add_noise(ego_from_body * b));
                sweep.source_ids.push_back(static_cast<int>(i));
            }
        }
        for (const Vec3& w : background) {
            sweep.points.push_back(add_noise(world_to_ego * w));
            sweep.source_ids.push_back(kBackgroundId);
        }
    }
    return sample;
}

}  // namespace sweepalign
