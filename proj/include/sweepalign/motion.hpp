#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sweepalign/alignment.hpp"
#include "sweepalign/bev.hpp"
#include "sweepalign/geometry.hpp"

namespace sweepalign {

inline constexpr int kNoise = -1;

// Density-based clustering on BEV coordinates. Points are scanned in index
// order and cluster ids are assigned in discovery order; a border point
// joins the first core point's cluster that reaches it. Returns kNoise for
// unclustered points.
std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_pts);

struct DbscanParams {
    double eps = 1.0;  // meters
    int min_pts = 5;
};

// All points of one instance.
struct GlobalGroup {
    int id = 0;
    std::vector<std::size_t> members;  // indices into the merged cloud
};

// Members of a global group that share one timestamp index.
struct LocalGroup {
    int group = 0;
    int k = 0;
    std::vector<std::size_t> members;
    Vec3 centroid = Vec3::Zero();
};

enum class GroupingMode {
    Instance,  // simulator instance attribution
    Dbscan,    // clustering of the dynamic points
};

struct Segmentation {
    std::vector<int> group_of_point;  // kNoise for non-dynamic or unclustered points
    std::vector<GlobalGroup> groups;  // ascending id
};

// Groups the DynamicFG points of `merged`.
Segmentation segment_dynamic_points(const MergedCloud& merged, GroupingMode mode,
                                    const DbscanParams& params = {});

// One LocalGroup per distinct k, ascending in k.
std::vector<LocalGroup> split_local_groups(const GlobalGroup& group, std::span<const Vec3> points,
                                           std::span<const int> timestamps);

// Stand-in for the learned per-point offset encoder: R^3 -> R^D.
using OffsetTransform = std::function<Eigen::VectorXf(const Vec3&)>;
Eigen::VectorXf identity_offset_transform(const Vec3& offset);

// Channelwise max over members of [f_i ; offset_transform(p_i - centroid)].
// `features` holds one row per entry of `points`. Throws InvalidArgument on
// an empty group.
Eigen::VectorXf local_group_features(std::span<const Vec3> points, const PointFeatures& features,
                                     const OffsetTransform& offset_transform = identity_offset_transform);

// Channelwise max over the local group features.
Eigen::VectorXf global_group_features(std::span<const Eigen::VectorXf> local_features);

// Least-squares rigid fit dst ~ R * src + t via the SVD of the centered
// cross-covariance, with det(R) = +1 enforced. Throws DegenerateInput for
// fewer than 3 pairs or collinear configurations.
SevenVector estimate_rigid_transform(std::span<const Vec3> src, std::span<const Vec3> dst);

enum class RectificationSource {
    GroundTruth,  // the group's instance trajectory
    OracleFit,    // rigid fit on ground-truth correspondences to the keyframe
};

struct GroupRectification {
    GroupKey key;
    SevenVector transform;
    // Fewer than 3 usable correspondences or a degenerate configuration:
    // translation-only transform between centroids.
    bool fallback = false;
};

// One transform per local group. Oracle fitting pairs each member with the
// keyframe observation of the same surface sample (same instance and
// sample_index). Throws DegenerateInput when oracle fitting meets a global
// group without keyframe points.
std::vector<GroupRectification> predict_group_rectifications(
    const MergedCloud& merged, std::span<const LocalGroup> local_groups,
    std::span<const ObjectTrajectory> trajectories, RectificationSource source);

GroupTransforms to_group_transforms(std::span<const GroupRectification> rectifications);

// T * p - p for DynamicFG points whose (group, k) has a transform; zero
// elsewhere.
std::vector<Vec3> flows_from_transforms(const MergedCloud& merged, const GroupTransforms& transforms,
                                        std::span<const int> group_of_point);

}  // namespace sweepalign
