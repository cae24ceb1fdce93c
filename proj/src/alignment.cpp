#include "sweepalign/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

std::unordered_map<int, const ObjectTrajectory*> index_trajectories(
    std::span<const ObjectTrajectory> trajectories) {
    std::unordered_map<int, const ObjectTrajectory*> by_id;
    for (const ObjectTrajectory& traj : trajectories) {
        by_id.emplace(traj.object_id, &traj);
    }
    return by_id;
}

const ObjectTrajectory& lookup(const std::unordered_map<int, const ObjectTrajectory*>& by_id, int id) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
        throw InvalidArgument("unknown instance id " + std::to_string(id));
    }
    return *it->second;
}

}  // namespace

void MergedCloud::validate() const {
    const std::size_t n = points.size();
    if (timestamp.size() != n || sweep_index.size() != n || point_index.size() != n ||
        instance.size() != n || sample_index.size() != n || labels.size() != n ||
        gt_flow.size() != n) {
        throw InvalidArgument("MergedCloud: per-point arrays differ in length");
    }
}

MergedCloud emc_merge(const SequenceSample& sample) {
    if (sample.sweeps.empty()) {
        throw InvalidArgument("emc_merge: sample has no sweeps");
    }
    std::size_t total = 0;
    for (const SweepRecord& sweep : sample.sweeps) {
        if (sweep.points.size() != sweep.source_ids.size()) {
            throw InvalidArgument("emc_merge: sweep " + std::to_string(sweep.k) +
                                  " has mismatched points/source_ids");
        }
        total += sweep.points.size();
    }

    MergedCloud merged;
    merged.points.reserve(total);
    merged.timestamp.reserve(total);
    merged.sweep_index.reserve(total);
    merged.point_index.reserve(total);
    merged.instance.reserve(total);
    merged.sample_index.reserve(total);

    std::vector<std::size_t> order(sample.sweeps.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sample.sweeps[a].k > sample.sweeps[b].k;
    });

    std::unordered_map<int, int> rank;
    for (const std::size_t s : order) {
        const SweepRecord& sweep = sample.sweeps[s];
        merged.max_k = std::max(merged.max_k, sweep.k);
        rank.clear();
        const RigidTransform& ego = sweep.ego_pose;
        for (std::size_t i = 0; i < sweep.points.size(); ++i) {
            const int id = sweep.source_ids[i];
            merged.points.push_back(ego * sweep.points[i]);
            merged.timestamp.push_back(sweep.k);
            merged.sweep_index.push_back(static_cast<int>(s));
            merged.point_index.push_back(static_cast<int>(i));
            merged.instance.push_back(id);
            merged.sample_index.push_back(id == kBackgroundId ? -1 : rank[id]++);
        }
    }
    merged.labels.assign(total, ClassLabel::Background);
    merged.gt_flow.assign(total, Vec3::Zero());
    return merged;
}

std::vector<ClassLabel> label_points(const MergedCloud& merged,
                                     std::span<const ObjectTrajectory> trajectories,
                                     double dyn_threshold) {
    merged.validate();
    const auto by_id = index_trajectories(trajectories);
    std::unordered_map<int, ClassLabel> object_label;
    std::vector<ClassLabel> labels(merged.size(), ClassLabel::Background);
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const int id = merged.instance[i];
        if (id == kBackgroundId) {
            continue;
        }
        auto it = object_label.find(id);
        if (it == object_label.end()) {
            const ObjectTrajectory& traj = lookup(by_id, id);
            if (traj.poses.empty()) {
                throw InvalidArgument("label_points: trajectory " + std::to_string(id) + " has no poses");
            }
            const int oldest = std::min(merged.max_k, static_cast<int>(traj.poses.size()) - 1);
            const double moved = (traj.poses[0].translation() -
                                  traj.poses[static_cast<std::size_t>(oldest)].translation())
                                     .norm();
            it = object_label
                     .emplace(id, moved > dyn_threshold ? ClassLabel::DynamicFG : ClassLabel::StaticFG)
                     .first;
        }
        labels[i] = it->second;
    }
    return labels;
}

RigidTransform gt_rectification_transform(const ObjectTrajectory& trajectory, int k) {
    if (k < 0 || k >= static_cast<int>(trajectory.poses.size())) {
        throw OutOfRange("gt_rectification_transform: k = " + std::to_string(k) + " out of range");
    }
    return trajectory.poses[0] * trajectory.poses[static_cast<std::size_t>(k)].inverse();
}

std::vector<Vec3> gt_scene_flow(const MergedCloud& merged,
                                std::span<const ObjectTrajectory> trajectories) {
    merged.validate();
    const auto by_id = index_trajectories(trajectories);
    std::map<GroupKey, RigidTransform> cache;
    std::vector<Vec3> flows(merged.size(), Vec3::Zero());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (merged.labels[i] != ClassLabel::DynamicFG) {
            continue;
        }
        const GroupKey key{merged.instance[i], merged.timestamp[i]};
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, gt_rectification_transform(lookup(by_id, key.group), key.k)).first;
        }
        flows[i] = it->second * merged.points[i] - merged.points[i];
    }
    return flows;
}

void annotate_ground_truth(MergedCloud& merged, std::span<const ObjectTrajectory> trajectories,
                           double dyn_threshold) {
    merged.labels = label_points(merged, trajectories, dyn_threshold);
    merged.gt_flow = gt_scene_flow(merged, trajectories);
}

std::vector<Vec3> rectify_by_flow(const MergedCloud& merged, std::span<const Vec3> flows) {
    if (flows.size() != merged.size()) {
        throw InvalidArgument("rectify_by_flow: " + std::to_string(flows.size()) + " flows for " +
                              std::to_string(merged.size()) + " points");
    }
    std::vector<Vec3> out(merged.points);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (merged.labels[i] == ClassLabel::DynamicFG) {
            out[i] += flows[i];
        }
    }
    return out;
}

std::vector<Vec3> rectify_by_transform(const MergedCloud& merged, const GroupTransforms& transforms,
                                       std::span<const int> group_ids) {
    merged.validate();
    if (group_ids.empty()) {
        group_ids = merged.instance;
    }
    if (group_ids.size() != merged.size()) {
        throw InvalidArgument("rectify_by_transform: group id count does not match the cloud");
    }
    std::vector<Vec3> out(merged.points);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (merged.labels[i] != ClassLabel::DynamicFG) {
            continue;
        }
        const auto it = transforms.find(GroupKey{group_ids[i], merged.timestamp[i]});
        if (it == transforms.end()) {
            throw InvalidArgument("rectify_by_transform: dynamic point " + std::to_string(i) +
                                  " (group " + std::to_string(group_ids[i]) + ", k " +
                                  std::to_string(merged.timestamp[i]) + ") has no transform");
        }
        out[i] = it->second * out[i];
    }
    return out;
}

double footprint_extent(std::span<const Vec3> points, double heading) {
    if (points.empty()) {
        return 0.0;
    }
    const Vec2 axis(std::cos(heading), std::sin(heading));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Vec3& p : points) {
        const double s = axis.dot(p.head<2>());
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return hi - lo;
}

}  // namespace sweepalign
