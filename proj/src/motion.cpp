#include "sweepalign/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>

#include <Eigen/SVD>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

constexpr int kUnvisited = -2;

std::int64_t cell_key(std::int64_t cx, std::int64_t cy) {
    return (cx << 32) ^ (cy & 0xFFFFFFFFLL);
}

class GridIndex {
public:
    GridIndex(std::span<const Vec2> points, double cell) : points_(points), cell_(cell) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto [cx, cy] = coords(points[i]);
            cells_[cell_key(cx, cy)].push_back(static_cast<int>(i));
        }
    }

    // Indices within `radius` (inclusive) of point i, ascending.
    void neighbors(std::size_t i, double radius, std::vector<int>& out) const {
        out.clear();
        const Vec2& p = points_[i];
        const auto [cx, cy] = coords(p);
        const double r2 = radius * radius;
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto it = cells_.find(cell_key(cx + dx, cy + dy));
                if (it == cells_.end()) {
                    continue;
                }
                for (const int j : it->second) {
                    if ((points_[static_cast<std::size_t>(j)] - p).squaredNorm() <= r2) {
                        out.push_back(j);
                    }
                }
            }
        }
        std::sort(out.begin(), out.end());
    }

private:
    std::pair<std::int64_t, std::int64_t> coords(const Vec2& p) const {
        return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
                static_cast<std::int64_t>(std::floor(p.y() / cell_))};
    }

    std::span<const Vec2> points_;
    double cell_;
    std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

Vec3 mean_of(std::span<const Vec3> points) {
    Vec3 sum = Vec3::Zero();
    for (const Vec3& p : points) {
        sum += p;
    }
    return sum / static_cast<double>(points.size());
}

}  // namespace

std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_pts) {
    if (!(eps > 0.0) || min_pts < 1) {
        throw InvalidArgument("dbscan: eps must be > 0 and min_pts >= 1");
    }
    std::vector<int> labels(points.size(), kUnvisited);
    const GridIndex index(points, eps);
    std::vector<int> region;
    std::vector<int> queue;
    int cluster = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] != kUnvisited) {
            continue;
        }
        index.neighbors(i, eps, region);
        if (static_cast<int>(region.size()) < min_pts) {
            labels[i] = kNoise;
            continue;
        }
        labels[i] = cluster;
        queue.assign(region.begin(), region.end());
        for (std::size_t q = 0; q < queue.size(); ++q) {
            const auto j = static_cast<std::size_t>(queue[q]);
            if (labels[j] == kNoise) {
                labels[j] = cluster;  // border point
            }
            if (labels[j] != kUnvisited) {
                continue;
            }
            labels[j] = cluster;
            index.neighbors(j, eps, region);
            if (static_cast<int>(region.size()) >= min_pts) {
                queue.insert(queue.end(), region.begin(), region.end());
            }
        }
        ++cluster;
    }
    return labels;
}

Segmentation segment_dynamic_points(const MergedCloud& merged, GroupingMode mode,
                                    const DbscanParams& params) {
    merged.validate();
    Segmentation seg;
    seg.group_of_point.assign(merged.size(), kNoise);
    std::vector<std::size_t> dynamic;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (merged.labels[i] == ClassLabel::DynamicFG) {
            dynamic.push_back(i);
        }
    }
    if (mode == GroupingMode::Instance) {
        for (const std::size_t i : dynamic) {
            seg.group_of_point[i] = merged.instance[i];
        }
    } else {
        std::vector<Vec2> xy;
        xy.reserve(dynamic.size());
        for (const std::size_t i : dynamic) {
            xy.push_back(merged.points[i].head<2>());
        }
        const std::vector<int> labels = dbscan(xy, params.eps, params.min_pts);
        for (std::size_t d = 0; d < dynamic.size(); ++d) {
            seg.group_of_point[dynamic[d]] = labels[d];
        }
    }
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (seg.group_of_point[i] != kNoise) {
            members[seg.group_of_point[i]].push_back(i);
        }
    }
    for (auto& [id, list] : members) {
        seg.groups.push_back(GlobalGroup{id, std::move(list)});
    }
    return seg;
}

std::vector<LocalGroup> split_local_groups(const GlobalGroup& group, std::span<const Vec3> points,
                                           std::span<const int> timestamps) {
    if (group.members.empty()) {
        throw InvalidArgument("split_local_groups: empty global group");
    }
    std::map<int, LocalGroup> by_k;
    for (const std::size_t i : group.members) {
        if (i >= points.size() || i >= timestamps.size()) {
            throw InvalidArgument("split_local_groups: member index out of range");
        }
        LocalGroup& local = by_k[timestamps[i]];
        local.group = group.id;
        local.k = timestamps[i];
        local.members.push_back(i);
        local.centroid += points[i];
    }
    std::vector<LocalGroup> out;
    out.reserve(by_k.size());
    for (auto& [k, local] : by_k) {
        local.centroid /= static_cast<double>(local.members.size());
        out.push_back(std::move(local));
    }
    return out;
}

Eigen::VectorXf identity_offset_transform(const Vec3& offset) { return offset.cast<float>(); }

Eigen::VectorXf local_group_features(std::span<const Vec3> points, const PointFeatures& features,
                                     const OffsetTransform& offset_transform) {
    if (points.empty()) {
        throw InvalidArgument("local_group_features: empty group");
    }
    if (static_cast<std::size_t>(features.rows()) != points.size()) {
        throw InvalidArgument("local_group_features: feature rows do not match the points");
    }
    const Vec3 centroid = mean_of(points);
    Eigen::VectorXf out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Eigen::VectorXf encoded = offset_transform(points[i] - centroid);
        Eigen::VectorXf row(features.cols() + encoded.size());
        row << features.row(static_cast<Eigen::Index>(i)).transpose(), encoded;
        if (i == 0) {
            out = row;
        } else {
            if (row.size() != out.size()) {
                throw InvalidArgument("local_group_features: offset transform width changed");
            }
            out = out.cwiseMax(row);
        }
    }
    return out;
}

Eigen::VectorXf global_group_features(std::span<const Eigen::VectorXf> local_features) {
    if (local_features.empty()) {
        throw InvalidArgument("global_group_features: no local groups");
    }
    Eigen::VectorXf out = local_features.front();
    for (std::size_t i = 1; i < local_features.size(); ++i) {
        if (local_features[i].size() != out.size()) {
            throw InvalidArgument("global_group_features: local feature widths differ");
        }
        out = out.cwiseMax(local_features[i]);
    }
    return out;
}

SevenVector estimate_rigid_transform(std::span<const Vec3> src, std::span<const Vec3> dst) {
    if (src.size() != dst.size()) {
        throw InvalidArgument("estimate_rigid_transform: src and dst differ in length");
    }
    if (src.size() < 3) {
        throw DegenerateInput("estimate_rigid_transform: need at least 3 correspondences");
    }
    const Vec3 src_mean = mean_of(src);
    const Vec3 dst_mean = mean_of(dst);
    Mat3 cross = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        cross += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();
    }
    const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sigma = svd.singularValues();
    if (!(sigma[0] > 0.0) || sigma[1] <= 1e-12 * sigma[0]) {
        throw DegenerateInput("estimate_rigid_transform: collinear or coincident points");
    }
    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    Mat3 correction = Mat3::Identity();
    if ((v * u.transpose()).determinant() < 0.0) {
        correction(2, 2) = -1.0;
    }
    const Mat3 rotation = v * correction * u.transpose();
    Quat q(rotation);
    q.normalize();
    if (q.w() < 0.0) {
        q.coeffs() *= -1.0;
    }
    return SevenVector{dst_mean - q.toRotationMatrix() * src_mean, q};
}

std::vector<GroupRectification> predict_group_rectifications(
    const MergedCloud& merged, std::span<const LocalGroup> local_groups,
    std::span<const ObjectTrajectory> trajectories, RectificationSource source) {
    merged.validate();
    std::unordered_map<int, const ObjectTrajectory*> by_id;
    for (const ObjectTrajectory& traj : trajectories) {
        by_id.emplace(traj.object_id, &traj);
    }

    // (instance, sample_index) -> keyframe point.
    std::map<std::pair<int, int>, std::size_t> keyframe_obs;
    if (source == RectificationSource::OracleFit) {
        for (std::size_t i = 0; i < merged.size(); ++i) {
            if (merged.timestamp[i] == 0 && merged.instance[i] != kBackgroundId) {
                keyframe_obs.emplace(std::pair{merged.instance[i], merged.sample_index[i]}, i);
            }
        }
    }
    std::map<int, const LocalGroup*> keyframe_group;
    for (const LocalGroup& local : local_groups) {
        if (local.k == 0) {
            keyframe_group.emplace(local.group, &local);
        }
    }

    std::vector<GroupRectification> out;
    out.reserve(local_groups.size());
    std::vector<Vec3> src;
    std::vector<Vec3> dst;
    for (const LocalGroup& local : local_groups) {
        if (local.members.empty()) {
            throw InvalidArgument("predict_group_rectifications: empty local group");
        }
        GroupRectification rect;
        rect.key = GroupKey{local.group, local.k};

        if (source == RectificationSource::GroundTruth) {
            // Majority instance of the members (groups equal instances unless
            // they come from clustering).
            std::map<int, std::size_t> votes;
            for (const std::size_t i : local.members) {
                ++votes[merged.instance[i]];
            }
            const auto best = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                return a.second < b.second;
            });
            const auto it = by_id.find(best->first);
            if (it == by_id.end()) {
                throw InvalidArgument("predict_group_rectifications: unknown instance id " +
                                      std::to_string(best->first));
            }
            rect.transform = SevenVector::from_transform(gt_rectification_transform(*it->second, local.k));
            out.push_back(rect);
            continue;
        }

        const auto key_group = keyframe_group.find(local.group);
        if (key_group == keyframe_group.end()) {
            throw DegenerateInput("predict_group_rectifications: group " + std::to_string(local.group) +
                                  " has no keyframe points");
        }
        if (local.k == 0) {
            out.push_back(rect);  // identity: the keyframe is the target placement
            continue;
        }
        src.clear();
        dst.clear();
        for (const std::size_t i : local.members) {
            const auto match = keyframe_obs.find(std::pair{merged.instance[i], merged.sample_index[i]});
            if (match != keyframe_obs.end()) {
                src.push_back(merged.points[i]);
                dst.push_back(merged.points[match->second]);
            }
        }
        try {
            rect.transform = estimate_rigid_transform(src, dst);
        } catch (const DegenerateInput&) {
            rect.fallback = true;
            const Vec3 shift = src.empty() ? Vec3(key_group->second->centroid - local.centroid)
                                           : Vec3(mean_of(dst) - mean_of(src));
            rect.transform = SevenVector{shift, Quat::Identity()};
        }
        out.push_back(rect);
    }
    return out;
}

GroupTransforms to_group_transforms(std::span<const GroupRectification> rectifications) {
    GroupTransforms transforms;
    for (const GroupRectification& rect : rectifications) {
        transforms.insert_or_assign(rect.key, rect.transform.to_transform());
    }
    return transforms;
}

std::vector<Vec3> flows_from_transforms(const MergedCloud& merged, const GroupTransforms& transforms,
                                        std::span<const int> group_of_point) {
    if (group_of_point.size() != merged.size()) {
        throw InvalidArgument("flows_from_transforms: group ids do not match the cloud");
    }
    std::vector<Vec3> flows(merged.size(), Vec3::Zero());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (merged.labels[i] != ClassLabel::DynamicFG || group_of_point[i] == kNoise) {
            continue;
        }
        const auto it = transforms.find(GroupKey{group_of_point[i], merged.timestamp[i]});
        if (it != transforms.end()) {
            flows[i] = it->second * merged.points[i] - merged.points[i];
        }
    }
    return flows;
}

}  // namespace sweepalign
