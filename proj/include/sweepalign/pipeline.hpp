#pragma once

#include <string>
#include <vector>

#include "sweepalign/alignment.hpp"
#include "sweepalign/bev.hpp"
#include "sweepalign/motion.hpp"
#include "sweepalign/scene_sim.hpp"

namespace sweepalign {

struct PipelineConfig {
    GridSpec grid;
    RectificationSource source = RectificationSource::OracleFit;
    GroupingMode grouping = GroupingMode::Instance;
    DbscanParams dbscan;
    // Scaled by the sample's length_scale.
    double dyn_threshold = kDefaultDynamicThreshold;
    Reduce reduce = Reduce::Max;
    FusionWeightFn fusion_weights = occupancy_fusion_weights;
    OffsetTransform offset_transform = identity_offset_transform;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct AlignmentResult {
    MergedCloud merged;                 // labeled, with gt flows
    PointFeatures point_features;       // interpolated from I0
    Segmentation segmentation;
    std::vector<LocalGroup> local_groups;
    std::vector<Eigen::VectorXf> global_features;  // one per segmentation group
    std::vector<GroupRectification> rectifications;
    std::vector<int> unrectified_groups;  // no keyframe points, flow left at zero
    std::vector<Vec3> pred_flows;
    std::vector<Vec3> rectified;        // p + o
    BevImage i0;
    BevImage i1;
    BevImage fused;
    std::vector<StageTiming> timings;   // merge, label, backbone, fit, scatter, fuse

    int fallback_count() const;
};

// merge -> label -> backbone -> fit -> scatter -> fuse on one sequence.
AlignmentResult run_alignment(const SequenceSample& sample, const PipelineConfig& config = {});

// Footprint lengths of one object along its keyframe heading.
struct ShadowMeasurement {
    int object_id = 0;
    ObjectClass cls = ObjectClass::Car;
    double speed = 0.0;  // mean over the merged window, m/s
    bool dynamic = false;
    double true_length = 0.0;
    double emc_extent = 0.0;
    double rectified_extent = 0.0;
};

// One row per object with points in the merged cloud.
std::vector<ShadowMeasurement> measure_shadow(const SequenceSample& sample, const AlignmentResult& result);

}  // namespace sweepalign
