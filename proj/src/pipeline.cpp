#include "sweepalign/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace sweepalign {

namespace {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& out) : out_(out), start_(Clock::now()) {}

    void lap(const char* stage) {
        const auto now = Clock::now();
        out_.push_back({stage, std::chrono::duration<double>(now - start_).count()});
        start_ = now;
    }

private:
    using Clock = std::chrono::steady_clock;
    std::vector<StageTiming>& out_;
    Clock::time_point start_;
};

}  // namespace

int AlignmentResult::fallback_count() const {
    return static_cast<int>(std::count_if(rectifications.begin(), rectifications.end(),
                                          [](const GroupRectification& r) { return r.fallback; }));
}

AlignmentResult run_alignment(const SequenceSample& sample, const PipelineConfig& config) {
    config.grid.validate();
    AlignmentResult result;
    StageClock clock(result.timings);

    result.merged = emc_merge(sample);
    clock.lap("merge");

    annotate_ground_truth(result.merged, sample.trajectories, config.dyn_threshold * sample.length_scale);
    clock.lap("label");

    const MergedCloud& merged = result.merged;
    const PointFeatures raw = featurize(merged, config.grid);
    result.i0 = scatter_to_bev(merged.points, raw, config.grid, Reduce::Max);
    result.point_features = interpolate_features(result.i0, merged.points);
    clock.lap("backbone");

    result.segmentation = segment_dynamic_points(merged, config.grouping, config.dbscan);
    std::vector<LocalGroup> fit_groups;
    for (const GlobalGroup& group : result.segmentation.groups) {
        std::vector<LocalGroup> locals = split_local_groups(group, merged.points, merged.timestamp);
        std::vector<Eigen::VectorXf> local_features;
        for (const LocalGroup& local : locals) {
            std::vector<Vec3> pts;
            PointFeatures feats(static_cast<Eigen::Index>(local.members.size()), result.point_features.cols());
            for (std::size_t m = 0; m < local.members.size(); ++m) {
                pts.push_back(merged.points[local.members[m]]);
                feats.row(static_cast<Eigen::Index>(m)) =
                    result.point_features.row(static_cast<Eigen::Index>(local.members[m]));
            }
            local_features.push_back(local_group_features(pts, feats, config.offset_transform));
        }
        result.global_features.push_back(global_group_features(local_features));
        const bool has_keyframe = !locals.empty() && locals.front().k == 0;
        if (config.source == RectificationSource::OracleFit && !has_keyframe) {
            result.unrectified_groups.push_back(group.id);
        } else {
            fit_groups.insert(fit_groups.end(), locals.begin(), locals.end());
        }
        result.local_groups.insert(result.local_groups.end(), locals.begin(), locals.end());
    }
    result.rectifications =
        predict_group_rectifications(merged, fit_groups, sample.trajectories, config.source);
    result.pred_flows = flows_from_transforms(merged, to_group_transforms(result.rectifications),
                                              result.segmentation.group_of_point);
    result.rectified = rectify_by_flow(merged, result.pred_flows);
    clock.lap("fit");

    result.i1 = scatter_to_bev(result.rectified, result.point_features, config.grid, config.reduce);
    clock.lap("scatter");

    result.fused = fuse_bev(result.i0, result.i1, config.fusion_weights);
    clock.lap("fuse");
    return result;
}

std::vector<ShadowMeasurement> measure_shadow(const SequenceSample& sample, const AlignmentResult& result) {
    const MergedCloud& merged = result.merged;
    std::vector<ShadowMeasurement> rows;
    for (const ObjectTrajectory& traj : sample.trajectories) {
        std::vector<Vec3> emc;
        std::vector<Vec3> rectified;
        bool dynamic = false;
        for (std::size_t i = 0; i < merged.size(); ++i) {
            if (merged.instance[i] == traj.object_id) {
                emc.push_back(merged.points[i]);
                rectified.push_back(result.rectified[i]);
                dynamic = dynamic || merged.labels[i] == ClassLabel::DynamicFG;
            }
        }
        if (emc.empty()) {
            continue;
        }
        const double heading = traj.poses[0].yaw();
        const int k = merged.max_k;
        const double window = k * sample.config.sweep_period;
        ShadowMeasurement row;
        row.object_id = traj.object_id;
        row.cls = traj.cls;
        row.speed = window > 0.0
                        ? (traj.poses[0].translation() - traj.poses[k].translation()).norm() / window /
                              sample.length_scale
                        : 0.0;
        row.dynamic = dynamic;
        row.true_length = traj.size.x();
        row.emc_extent = footprint_extent(emc, heading);
        row.rectified_extent = footprint_extent(rectified, heading);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sweepalign
