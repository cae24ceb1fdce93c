#include "sweepalign/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sweepalign/errors.hpp"
#include "sweepalign/sequence_io.hpp"

namespace sweepalign {

namespace {

constexpr std::string_view kDatabaseFormatTag = "sweepalign.gt_database";
constexpr int kDatabaseFormatVersion = 1;

Mat3 mirror(FlipAxis axis) {
    return axis == FlipAxis::X ? Vec3(1.0, -1.0, 1.0).asDiagonal().toDenseMatrix()
                               : Vec3(-1.0, 1.0, 1.0).asDiagonal().toDenseMatrix();
}

// Applies `point_map` to sensor points, `ego_map` to ego poses, `object_map`
// to object poses and `box_map` to keyframe boxes.
template <typename PointMap, typename EgoMap, typename ObjectMap, typename BoxMap>
SequenceSample map_sample(const SequenceSample& sample, PointMap point_map, EgoMap ego_map,
                          ObjectMap object_map, BoxMap box_map) {
    SequenceSample out = sample;
    for (SweepRecord& sweep : out.sweeps) {
        sweep.ego_pose = ego_map(sweep.ego_pose);
        for (Vec3& p : sweep.points) {
            p = point_map(p);
        }
    }
    for (ObjectTrajectory& traj : out.trajectories) {
        for (RigidTransform& pose : traj.poses) {
            pose = object_map(pose);
        }
    }
    for (Box3D& box : out.keyframe_boxes) {
        box = box_map(box);
    }
    return out;
}

template <typename VectorMap>
MergedCloud map_cloud(const MergedCloud& merged, VectorMap map) {
    merged.validate();
    MergedCloud out = merged;
    for (Vec3& p : out.points) {
        p = map(p);
    }
    for (Vec3& o : out.gt_flow) {
        o = map(o);
    }
    return out;
}

void check_factor(double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw InvalidArgument("global_scale: factor must be > 0 and finite");
    }
}

void check_angle(double angle) {
    if (!std::isfinite(angle)) {
        throw InvalidArgument("global_rotate: angle must be finite");
    }
}

Box3D box_under(const Box3D& box, const RigidTransform& placement) {
    Box3D out = box;
    out.center = placement * box.center;
    out.yaw = normalize_angle(box.yaw + placement.yaw());
    return out;
}

SequenceSample entry_to_sequence(const GtDatabaseEntry& entry) {
    SequenceSample seq;
    seq.config.num_sweeps = entry.num_steps();
    seq.config.num_objects = 0;
    seq.config.background_points_per_sweep = 0;
    for (int k = 0; k < entry.num_steps(); ++k) {
        SweepRecord sweep;
        sweep.k = k;
        sweep.ego_pose = entry.poses[k];
        sweep.points = entry.body_points[k];
        sweep.source_ids.assign(sweep.points.size(), 0);
        seq.sweeps.push_back(std::move(sweep));
    }
    seq.trajectories.push_back({0, entry.cls, entry.size, entry.poses});
    Box3D box = entry.keyframe_box;
    box.object_id = 0;
    seq.keyframe_boxes.push_back(box);
    return seq;
}

GtDatabaseEntry entry_from_sequence(const SequenceSample& seq, const std::string& where) {
    if (seq.trajectories.size() != 1 || seq.keyframe_boxes.size() != 1) {
        throw ParseError(where + ": expected one trajectory and one box");
    }
    const ObjectTrajectory& traj = seq.trajectories.front();
    if (traj.poses.size() != seq.sweeps.size()) {
        throw ParseError(where + ": trajectory length differs from the sweep count");
    }
    GtDatabaseEntry entry;
    entry.cls = traj.cls;
    entry.size = traj.size;
    entry.keyframe_box = seq.keyframe_boxes.front();
    entry.keyframe_box.object_id.reset();
    entry.poses = traj.poses;
    for (const SweepRecord& sweep : seq.sweeps) {
        entry.body_points.push_back(sweep.points);
    }
    return entry;
}

}  // namespace

Vec3 flip_vector(const Vec3& v, FlipAxis axis) {
    return axis == FlipAxis::X ? Vec3(v.x(), -v.y(), v.z()) : Vec3(-v.x(), v.y(), v.z());
}

SequenceSample global_flip(const SequenceSample& sample, FlipAxis axis) {
    const Mat3 m = mirror(axis);
    // A mirrored body keeps a proper rotation when its own frame is mirrored
    // across the body xz-plane as well; cuboids are symmetric under that.
    const Mat3 body = mirror(FlipAxis::X);
    return map_sample(
        sample, [&](const Vec3& p) { return flip_vector(p, axis); },
        [&](const RigidTransform& pose) {
            return RigidTransform::from_matrix(m * pose.rotation_matrix() * m, m * pose.translation());
        },
        [&](const RigidTransform& pose) {
            return RigidTransform::from_matrix(m * pose.rotation_matrix() * body, m * pose.translation());
        },
        [&](const Box3D& box) {
            Box3D out = box;
            out.center = m * box.center;
            out.yaw = normalize_angle(axis == FlipAxis::X ? -box.yaw : kPi - box.yaw);
            return out;
        });
}

MergedCloud global_flip(const MergedCloud& merged, FlipAxis axis) {
    return map_cloud(merged, [&](const Vec3& v) { return flip_vector(v, axis); });
}

SequenceSample global_scale(const SequenceSample& sample, double factor) {
    check_factor(factor);
    auto scale_pose = [&](const RigidTransform& pose) {
        return RigidTransform(pose.rotation(), factor * pose.translation());
    };
    SequenceSample out = map_sample(
        sample, [&](const Vec3& p) -> Vec3 { return factor * p; }, scale_pose, scale_pose,
        [&](const Box3D& box) {
            Box3D b = box;
            b.center *= factor;
            b.size *= factor;
            return b;
        });
    for (ObjectTrajectory& traj : out.trajectories) {
        traj.size *= factor;
    }
    out.length_scale *= factor;
    return out;
}

MergedCloud global_scale(const MergedCloud& merged, double factor) {
    check_factor(factor);
    return map_cloud(merged, [&](const Vec3& v) -> Vec3 { return factor * v; });
}

SequenceSample global_rotate(const SequenceSample& sample, double angle) {
    check_angle(angle);
    const RigidTransform g = RigidTransform::from_yaw(angle);
    const RigidTransform g_inv = g.inverse();
    return map_sample(
        sample, [&](const Vec3& p) { return g * p; },
        [&](const RigidTransform& pose) { return g * pose * g_inv; },
        [&](const RigidTransform& pose) { return g * pose; },
        [&](const Box3D& box) { return box_under(box, g); });
}

MergedCloud global_rotate(const MergedCloud& merged, double angle) {
    check_angle(angle);
    const Mat3 r = yaw_quaternion(angle).toRotationMatrix();
    return map_cloud(merged, [&](const Vec3& v) -> Vec3 { return r * v; });
}

double scaled_dynamic_threshold(const SequenceSample& sample, double base) {
    return base * sample.length_scale;
}

SequenceSample random_global_augment(const SequenceSample& sample, const AugmentationConfig& config,
                                     std::mt19937_64& rng, AugmentationRecord* record) {
    if (!(config.flip_probability >= 0.0 && config.flip_probability <= 1.0) ||
        !(config.min_scale > 0.0 && config.min_scale <= config.max_scale) ||
        !(config.max_rotation >= 0.0)) {
        throw InvalidArgument("AugmentationConfig: invalid ranges");
    }
    std::bernoulli_distribution flip(config.flip_probability);
    std::uniform_real_distribution<double> scale(config.min_scale, config.max_scale);
    std::uniform_real_distribution<double> rotation(-config.max_rotation, config.max_rotation);
    AugmentationRecord rec;
    rec.flip_x = flip(rng);
    rec.flip_y = flip(rng);
    rec.scale = scale(rng);
    rec.rotation = rotation(rng);
    SequenceSample out = sample;
    if (rec.flip_x) out = global_flip(out, FlipAxis::X);
    if (rec.flip_y) out = global_flip(out, FlipAxis::Y);
    out = global_rotate(global_scale(out, rec.scale), rec.rotation);
    if (record) {
        *record = rec;
    }
    return out;
}

std::vector<GtDatabaseEntry> build_gt_database(std::span<const SequenceSample> samples) {
    std::vector<GtDatabaseEntry> database;
    for (const SequenceSample& sample : samples) {
        const int steps = std::min(sample.num_sweeps(), kMaxTrajectorySteps);
        for (const ObjectTrajectory& traj : sample.trajectories) {
            if (static_cast<int>(traj.poses.size()) < steps) {
                throw InvalidArgument("build_gt_database: trajectory " + std::to_string(traj.object_id) +
                                      " is shorter than the sample");
            }
            GtDatabaseEntry entry;
            entry.cls = traj.cls;
            entry.size = traj.size;
            entry.keyframe_box = traj.box_at(0);
            entry.keyframe_box.object_id.reset();
            entry.body_points.resize(steps);
            for (int k = 0; k < steps; ++k) {
                const SweepRecord& sweep = sample.sweeps[k];
                const RigidTransform to_body = traj.poses[k].inverse() * sweep.ego_pose;
                for (std::size_t i = 0; i < sweep.points.size(); ++i) {
                    if (sweep.source_ids[i] == traj.object_id) {
                        entry.body_points[k].push_back(to_body * sweep.points[i]);
                    }
                }
                entry.poses.push_back(traj.poses[k]);
            }
            if (!entry.body_points[0].empty()) {
                database.push_back(std::move(entry));
            }
        }
    }
    return database;
}

int insert_entry(SequenceSample& sample, const GtDatabaseEntry& entry, const RigidTransform& placement) {
    const int sweeps = sample.num_sweeps();
    if (entry.num_steps() < sweeps || static_cast<int>(entry.body_points.size()) != entry.num_steps()) {
        throw InvalidArgument("insert_entry: entry covers " + std::to_string(entry.num_steps()) +
                              " steps, sample has " + std::to_string(sweeps) + " sweeps");
    }
    int id = 0;
    for (const ObjectTrajectory& traj : sample.trajectories) {
        id = std::max(id, traj.object_id + 1);
    }
    ObjectTrajectory traj{id, entry.cls, entry.size, {}};
    for (int k = 0; k < sweeps; ++k) {
        const RigidTransform pose = placement * entry.poses[k];
        traj.poses.push_back(pose);
        SweepRecord& sweep = sample.sweeps[k];
        const RigidTransform to_sensor = sweep.ego_pose.inverse() * pose;
        for (const Vec3& b : entry.body_points[k]) {
            sweep.points.push_back(to_sensor * b);
            sweep.source_ids.push_back(id);
        }
    }
    Box3D box = box_under(entry.keyframe_box, placement);
    box.object_id = id;
    box.score.reset();
    sample.trajectories.push_back(std::move(traj));
    sample.keyframe_boxes.push_back(box);
    return id;
}

GtSamplingResult gt_sampling_with_trajectory(const SequenceSample& sample,
                                             std::span<const GtDatabaseEntry> database, int n_insert,
                                             std::mt19937_64& rng, const GtSamplingOptions& options) {
    if (n_insert < 0 || options.max_retries < 1) {
        throw InvalidArgument("gt_sampling_with_trajectory: n_insert must be >= 0 and max_retries >= 1");
    }
    std::vector<const GtDatabaseEntry*> eligible;
    for (const GtDatabaseEntry& entry : database) {
        if (entry.num_steps() >= sample.num_sweeps()) {
            eligible.push_back(&entry);
        }
    }
    if (eligible.empty()) {
        throw InvalidArgument("gt_sampling_with_trajectory: no database entry covers " +
                              std::to_string(sample.num_sweeps()) + " sweeps");
    }
    GtSamplingResult result{sample, n_insert, 0, false};
    const double range = sample.config.xy_range * sample.length_scale;
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    std::uniform_real_distribution<double> yaw(-options.max_yaw_perturbation, options.max_yaw_perturbation);
    for (int n = 0; n < n_insert; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < options.max_retries && !placed; ++attempt) {
            const GtDatabaseEntry& entry = *eligible[pick(rng)];
            const double margin = 0.5 * entry.keyframe_box.size.head<2>().norm();
            if (margin >= range) {
                continue;
            }
            std::uniform_real_distribution<double> coord(-range + margin, range - margin);
            const double x = coord(rng);
            const double y = coord(rng);
            const Vec3 c = entry.keyframe_box.center;
            const RigidTransform placement =
                RigidTransform::from_yaw(yaw(rng), Vec3(x, y, 0.0)) *
                RigidTransform::from_translation(Vec3(-c.x(), -c.y(), 0.0));
            const Box3D candidate = box_under(entry.keyframe_box, placement);
            const bool collides = std::any_of(
                result.sample.keyframe_boxes.begin(), result.sample.keyframe_boxes.end(),
                [&](const Box3D& other) { return bev_iou(candidate, other) > 0.0; });
            if (collides) {
                continue;
            }
            insert_entry(result.sample, entry, placement);
            placed = true;
        }
        result.inserted += placed ? 1 : 0;
    }
    result.shortfall = result.inserted < result.requested;
    return result;
}

void write_gt_database(std::span<const GtDatabaseEntry> database, const std::filesystem::path& path) {
    Json entries = Json::array();
    for (const GtDatabaseEntry& entry : database) {
        entries.push_back(sequence_to_json(entry_to_sequence(entry)));
    }
    const Json root{{"format", kDatabaseFormatTag},
                    {"version", kDatabaseFormatVersion},
                    {"entries", std::move(entries)}};
    write_text_file(path, root.dump(1));
}

std::vector<GtDatabaseEntry> read_gt_database(const std::filesystem::path& path,
                                              std::vector<std::string>* warnings) {
    const Json root = parse_json_text(read_text_file(path));
    if (!root.is_object() || root.value("format", std::string()) != kDatabaseFormatTag) {
        throw ParseError(path.string() + ": not a ground truth database");
    }
    if (require_field(root, "version", "database") != kDatabaseFormatVersion) {
        throw VersionError(path.string() + ": unsupported database version");
    }
    warn_unknown_keys(root, {"format", "version", "entries"}, "database", warnings);
    const Json& entries = require_field(root, "entries", "database");
    if (!entries.is_array()) {
        throw ParseError("field 'entries': expected an array");
    }
    std::vector<GtDatabaseEntry> database;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string where = "entries[" + std::to_string(i) + "]";
        database.push_back(entry_from_sequence(sequence_from_json(entries[i], warnings), where));
    }
    return database;
}

}  // namespace sweepalign
