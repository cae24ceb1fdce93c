#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sweepalign/geometry.hpp"

namespace sweepalign {

struct FlowMetrics {
    double epe = 0.0;         // meters
    double acc_s = 0.0;       // percent
    double acc_r = 0.0;       // percent
    double r_outliers = 0.0;  // percent
    std::size_t n_points = 0;
};

// Per-point error e_i = |pred_i - gt_i| and relative error e_i / |gt_i|
// (infinite for a zero gt flow). A point counts toward AccS when e_i < 0.05
// or rel_i < 0.05, toward AccR with 0.10, and is an outlier when e_i > 0.30
// and rel_i > 0.30. Throws InvalidArgument on length mismatch or when no
// point is selected.
FlowMetrics scene_flow_metrics(std::span<const Vec3> pred, std::span<const Vec3> gt);
FlowMetrics scene_flow_metrics(std::span<const Vec3> pred, std::span<const Vec3> gt,
                               const std::vector<bool>& mask);

enum class MatchMode { BevDistance, Iou };
enum class IouType { Bev, ThreeD };

std::string_view mode_name(MatchMode mode);  // "bev-distance" / "iou"

// car 0.7, pedestrian 0.1, bicycle 0.3; truck, construction vehicle, bus,
// trailer 0.7; barrier, motorcycle, traffic cone 0.5.
std::map<ObjectClass, double> default_iou_thresholds();

struct MatchConfig {
    MatchMode mode = MatchMode::BevDistance;
    double distance_threshold = 2.0;  // meters, bev-distance mode
    IouType iou_type = IouType::Bev;
    std::map<ObjectClass, double> iou_thresholds = default_iou_thresholds();
};

// Flags and scores in matching order (descending score, ties by input order).
struct MatchResult {
    std::vector<bool> tp;
    std::vector<double> scores;
    std::size_t n_gt = 0;
};

// Greedy matching of one class in one frame: each prediction, by
// descending score, takes the closest unmatched ground truth (smallest BEV
// center distance or largest IoU) and is a TP when that candidate passes the
// threshold (distance <= threshold, IoU >= class threshold). Throws
// InvalidArgument when classes are mixed, a prediction lacks a score, or the
// class has no IoU threshold.
MatchResult match_detections(std::span<const Box3D> preds, std::span<const Box3D> gts,
                             const MatchConfig& config);

struct ApOptions {
    // Drop recall samples up to min_recall and subtract min_precision,
    // renormalizing to [0, 1].
    bool trim = false;
    double min_recall = 0.1;
    double min_precision = 0.1;
};

// 101-point interpolated AP: precision at recall r is the maximum precision
// over operating points with recall >= r (0 when none). Flags are re-sorted
// by descending score, ties by input order. Throws InvalidArgument for
// n_gt = 0 or length mismatch.
double average_precision(const std::vector<bool>& tp, std::span<const double> scores, std::size_t n_gt,
                         const ApOptions& options = {});

struct DetectionFrame {
    std::vector<Box3D> preds;
    std::vector<Box3D> gts;
};

struct DetectionConfig {
    MatchMode mode = MatchMode::BevDistance;
    std::vector<double> distance_thresholds{0.5, 1.0, 2.0, 4.0};
    IouType iou_type = IouType::Bev;
    std::map<ObjectClass, double> iou_thresholds = default_iou_thresholds();
    ApOptions ap;
};

struct ApEntry {
    ObjectClass cls = ObjectClass::Car;
    double threshold = 0.0;
    double ap = 0.0;
};

struct DetectionReport {
    MatchMode mode = MatchMode::BevDistance;
    std::vector<ApEntry> entries;          // one per (class, threshold)
    std::map<ObjectClass, double> class_ap;  // mean over thresholds
    double map = 0.0;                      // mean of class_ap
};

// Classes are evaluated when at least one frame holds a ground truth of that
// class; predictions of other classes are ignored. Matching is per frame,
// ranking is global. Throws InvalidArgument when no ground truth exists.
DetectionReport evaluate_detections(std::span<const DetectionFrame> frames, const DetectionConfig& config);

// Columns: class, mode, threshold, AP. One row per entry, then one mean row
// per class (threshold "mean") and an "mAP" row.
std::string detection_report_csv(const DetectionReport& report);
std::string detection_report_text(const DetectionReport& report);
std::string flow_metrics_csv(const FlowMetrics& metrics);
std::string flow_metrics_text(const FlowMetrics& metrics);

}  // namespace sweepalign
