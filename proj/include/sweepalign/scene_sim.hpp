#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sweepalign/geometry.hpp"

namespace sweepalign {

inline constexpr int kBackgroundId = -1;

// Explicitly placed object; overrides random placement when present in
// ScenarioConfig::objects. Pose and motion are given at the keyframe.
struct ObjectSpec {
    ObjectClass cls = ObjectClass::Car;
    Vec3 size{4.5, 1.9, 1.7};
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
    double speed = 0.0;     // m/s along the heading
    double yaw_rate = 0.0;  // rad/s
};

struct ScenarioConfig {
    int num_sweeps = 10;          // keyframe + 9 past sweeps
    double sweep_period = 0.05;   // 20 Hz
    int num_objects = 6;
    double min_object_speed = 0.0;
    double max_object_speed = 10.0;
    double max_yaw_rate = 0.2;    // sampled uniformly in [-max, max]
    double ego_speed = 5.0;
    double ego_yaw_rate = 0.0;
    int points_per_object_per_sweep = 200;
    int background_points_per_sweep = 2000;
    double xy_range = 50.0;       // keyframe points lie in [-xy_range, xy_range]^2
    double ground_z = -1.8;
    double noise_sigma = 0.0;     // isotropic, sensor frame
    std::uint64_t seed = 0;
    std::vector<ObjectSpec> objects;

    // Throws InvalidArgument naming the offending field.
    void validate() const;
};

// poses[k] is the object's world pose at sweep t-k.
struct ObjectTrajectory {
    int object_id = 0;
    ObjectClass cls = ObjectClass::Car;
    Vec3 size = Vec3::Ones();
    std::vector<RigidTransform> poses;

    Box3D box_at(int k) const;
};

// One LiDAR sweep. Points are in the ego frame of that sweep; source_ids
// holds the emitting object id or kBackgroundId.
struct SweepRecord {
    int k = 0;
    RigidTransform ego_pose;
    std::vector<Vec3> points;
    std::vector<int> source_ids;
};

// sweeps[k] has timestamp index k (0 = keyframe). The world frame is the
// keyframe ego frame for generated samples.
struct SequenceSample {
    ScenarioConfig config;
    std::vector<SweepRecord> sweeps;
    std::vector<ObjectTrajectory> trajectories;
    std::vector<Box3D> keyframe_boxes;
    // Product of global scaling factors applied since generation; length
    // thresholds (dynamic-object threshold) are scaled by it.
    double length_scale = 1.0;

    int num_sweeps() const { return static_cast<int>(sweeps.size()); }
    const ObjectTrajectory& trajectory(int object_id) const;
};

// Deterministic for a fixed seed. Throws EmptySceneError when the
// configuration produces no points at all.
SequenceSample generate_sequence(const ScenarioConfig& config);

// Exact stored pose for integral k, interpolate_pose between the two
// neighbouring sweeps otherwise. Throws OutOfRange outside [0, K].
RigidTransform object_pose_at(const ObjectTrajectory& trajectory, double k);

// Pose reached after moving for `dt` seconds (negative = past) from `start`
// with constant forward speed and yaw rate.
RigidTransform constant_turn_pose(const RigidTransform& start, double speed, double yaw_rate,
                                  double dt);

// Uniform area-weighted samples on the surface of a cuboid centered at the
// origin.
std::vector<Vec3> sample_cuboid_surface(const Vec3& size, int count, std::mt19937_64& rng);

}  // namespace sweepalign
