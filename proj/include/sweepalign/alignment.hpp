#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sweepalign/geometry.hpp"
#include "sweepalign/scene_sim.hpp"

namespace sweepalign {

enum class ClassLabel : std::uint8_t { Background = 0, StaticFG = 1, DynamicFG = 2 };

inline constexpr double kDefaultDynamicThreshold = 0.5;  // meters

// EMC output. Every per-point vector has points.size() entries; points are
// ordered by sweep index k descending, then by their index in the sweep.
struct MergedCloud {
    std::vector<Vec3> points;         // world frame
    std::vector<int> timestamp;       // k
    std::vector<int> sweep_index;     // sweep of origin
    std::vector<int> point_index;     // index inside that sweep
    std::vector<int> instance;        // object id or kBackgroundId
    // Rank of the point among its instance's points in the same sweep. The
    // simulator reuses one surface sample set per object, so equal ranks
    // observe the same body-frame point; -1 for background.
    std::vector<int> sample_index;
    std::vector<ClassLabel> labels;   // Background until labeled
    std::vector<Vec3> gt_flow;        // zero unless DynamicFG
    int max_k = 0;                    // oldest merged sweep

    std::size_t size() const { return points.size(); }
    // Throws InvalidArgument if the parallel arrays disagree in length.
    void validate() const;
};

// Maps every point of every sweep into the world frame with its sweep's ego
// pose.
MergedCloud emc_merge(const SequenceSample& sample);

// Objects whose center moves strictly more than `dyn_threshold` between the
// oldest merged sweep and the keyframe are dynamic. Throws InvalidArgument
// for instance ids without a trajectory.
std::vector<ClassLabel> label_points(const MergedCloud& merged,
                                     std::span<const ObjectTrajectory> trajectories,
                                     double dyn_threshold = kDefaultDynamicThreshold);

// poses[0] * inverse(poses[k]): carries a world point observed at t-k onto
// the object's keyframe placement.
RigidTransform gt_rectification_transform(const ObjectTrajectory& trajectory, int k);

// Uses merged.labels; zero for everything that is not DynamicFG.
std::vector<Vec3> gt_scene_flow(const MergedCloud& merged,
                                std::span<const ObjectTrajectory> trajectories);

// label_points followed by gt_scene_flow, stored into `merged`.
void annotate_ground_truth(MergedCloud& merged, std::span<const ObjectTrajectory> trajectories,
                           double dyn_threshold = kDefaultDynamicThreshold);

// p + o for DynamicFG points, p otherwise.
std::vector<Vec3> rectify_by_flow(const MergedCloud& merged, std::span<const Vec3> flows);

// Local group identity: (global group id, timestamp index).
struct GroupKey {
    int group = 0;
    int k = 0;
    auto operator<=>(const GroupKey&) const = default;
};

using GroupTransforms = std::map<GroupKey, RigidTransform>;

// Applies the transform of each DynamicFG point's (group, k) local group.
// group_ids defaults to merged.instance. Throws InvalidArgument when a
// DynamicFG point has no group transform.
std::vector<Vec3> rectify_by_transform(const MergedCloud& merged, const GroupTransforms& transforms,
                                       std::span<const int> group_ids = {});

// Extent of the points projected on the horizontal direction `heading`.
double footprint_extent(std::span<const Vec3> points, double heading);

}  // namespace sweepalign
