#include "sweepalign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

std::vector<std::size_t> score_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

FlowMetrics scene_flow_metrics(std::span<const Vec3> pred, std::span<const Vec3> gt) {
    return scene_flow_metrics(pred, gt, std::vector<bool>(pred.size(), true));
}

FlowMetrics scene_flow_metrics(std::span<const Vec3> pred, std::span<const Vec3> gt,
                               const std::vector<bool>& mask) {
    if (pred.size() != gt.size() || mask.size() != pred.size()) {
        throw InvalidArgument("scene_flow_metrics: pred, gt and mask differ in length");
    }
    double sum = 0.0;
    std::size_t n = 0, strict = 0, relaxed = 0, outliers = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) {
            continue;
        }
        const double err = (pred[i] - gt[i]).norm();
        const double gt_norm = gt[i].norm();
        const double rel = gt_norm > 0.0 ? err / gt_norm : std::numeric_limits<double>::infinity();
        sum += err;
        ++n;
        strict += (err < 0.05 || rel < 0.05) ? 1 : 0;
        relaxed += (err < 0.10 || rel < 0.10) ? 1 : 0;
        outliers += (err > 0.30 && rel > 0.30) ? 1 : 0;
    }
    if (n == 0) {
        throw InvalidArgument("scene_flow_metrics: no points selected");
    }
    const double count = static_cast<double>(n);
    return {sum / count, 100.0 * strict / count, 100.0 * relaxed / count, 100.0 * outliers / count, n};
}

std::string_view mode_name(MatchMode mode) {
    return mode == MatchMode::BevDistance ? "bev-distance" : "iou";
}

std::map<ObjectClass, double> default_iou_thresholds() {
    return {
        {ObjectClass::Car, 0.7},        {ObjectClass::Pedestrian, 0.1},
        {ObjectClass::Bicycle, 0.3},    {ObjectClass::Truck, 0.7},
        {ObjectClass::ConstructionVehicle, 0.7}, {ObjectClass::Bus, 0.7},
        {ObjectClass::Trailer, 0.7},    {ObjectClass::Barrier, 0.5},
        {ObjectClass::Motorcycle, 0.5}, {ObjectClass::TrafficCone, 0.5},
    };
}

MatchResult match_detections(std::span<const Box3D> preds, std::span<const Box3D> gts,
                             const MatchConfig& config) {
    std::optional<ObjectClass> cls;
    auto check_class = [&](const Box3D& box) {
        if (cls && *cls != box.cls) {
            throw InvalidArgument("match_detections: boxes of different classes");
        }
        cls = box.cls;
    };
    std::vector<double> scores;
    scores.reserve(preds.size());
    for (const Box3D& p : preds) {
        check_class(p);
        if (!p.score) {
            throw InvalidArgument("match_detections: prediction without score");
        }
        scores.push_back(*p.score);
    }
    for (const Box3D& g : gts) {
        check_class(g);
    }
    double iou_threshold = 0.0;
    if (config.mode == MatchMode::Iou && cls) {
        const auto it = config.iou_thresholds.find(*cls);
        if (it == config.iou_thresholds.end()) {
            throw InvalidArgument("match_detections: no IoU threshold for class " +
                                  std::string(class_name(*cls)));
        }
        iou_threshold = it->second;
    }

    MatchResult result;
    result.n_gt = gts.size();
    std::vector<bool> taken(gts.size(), false);
    for (const std::size_t i : score_order(scores)) {
        const Box3D& p = preds[i];
        std::size_t best = gts.size();
        double best_value = 0.0;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            if (taken[j]) {
                continue;
            }
            if (config.mode == MatchMode::BevDistance) {
                const double d = (p.center.head<2>() - gts[j].center.head<2>()).norm();
                if (best == gts.size() || d < best_value) {
                    best = j;
                    best_value = d;
                }
            } else {
                const double iou = config.iou_type == IouType::Bev ? bev_iou(p, gts[j]) : iou_3d(p, gts[j]);
                if (best == gts.size() || iou > best_value) {
                    best = j;
                    best_value = iou;
                }
            }
        }
        bool hit = false;
        if (best < gts.size()) {
            hit = config.mode == MatchMode::BevDistance ? best_value <= config.distance_threshold
                                                        : best_value >= iou_threshold;
        }
        if (hit) {
            taken[best] = true;
        }
        result.tp.push_back(hit);
        result.scores.push_back(scores[i]);
    }
    return result;
}

double average_precision(const std::vector<bool>& tp, std::span<const double> scores, std::size_t n_gt,
                         const ApOptions& options) {
    if (n_gt == 0) {
        throw InvalidArgument("average_precision: no ground truth");
    }
    if (tp.size() != scores.size()) {
        throw InvalidArgument("average_precision: flags and scores differ in length");
    }
    // Operating points after each ranked detection.
    std::vector<std::size_t> tp_count;
    std::vector<double> precision;
    std::size_t hits = 0, seen = 0;
    for (const std::size_t i : score_order(scores)) {
        ++seen;
        hits += tp[i] ? 1 : 0;
        tp_count.push_back(hits);
        precision.push_back(static_cast<double>(hits) / static_cast<double>(seen));
    }
    // Right-to-left running maximum gives the precision envelope.
    for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    std::vector<double> sampled(101, 0.0);
    std::size_t cursor = 0;
    for (std::size_t r = 0; r <= 100; ++r) {
        // recall >= r / 100, compared in integers
        while (cursor < tp_count.size() && tp_count[cursor] * 100 < r * n_gt) {
            ++cursor;
        }
        sampled[r] = cursor < tp_count.size() ? precision[cursor] : 0.0;
    }
    if (!options.trim) {
        double sum = 0.0;
        for (const double p : sampled) {
            sum += p;
        }
        return sum / 101.0;
    }
    if (!(options.min_precision >= 0.0 && options.min_precision < 1.0) ||
        !(options.min_recall >= 0.0 && options.min_recall < 1.0)) {
        throw InvalidArgument("average_precision: trim bounds must lie in [0, 1)");
    }
    const auto first = static_cast<std::size_t>(std::lround(100.0 * options.min_recall)) + 1;
    double sum = 0.0;
    for (std::size_t r = first; r <= 100; ++r) {
        sum += std::max(0.0, sampled[r] - options.min_precision);
    }
    return sum / static_cast<double>(101 - first) / (1.0 - options.min_precision);
}

DetectionReport evaluate_detections(std::span<const DetectionFrame> frames, const DetectionConfig& config) {
    if (config.mode == MatchMode::BevDistance && config.distance_thresholds.empty()) {
        throw InvalidArgument("evaluate_detections: no distance thresholds");
    }
    std::map<ObjectClass, std::size_t> gt_count;
    for (const DetectionFrame& frame : frames) {
        for (const Box3D& g : frame.gts) {
            ++gt_count[g.cls];
        }
    }
    if (gt_count.empty()) {
        throw InvalidArgument("evaluate_detections: no ground truth boxes");
    }

    DetectionReport report;
    report.mode = config.mode;
    for (const ObjectClass cls : kAllClasses) {
        if (!gt_count.contains(cls)) {
            continue;
        }
        std::vector<double> thresholds;
        if (config.mode == MatchMode::BevDistance) {
            thresholds = config.distance_thresholds;
        } else {
            const auto it = config.iou_thresholds.find(cls);
            if (it == config.iou_thresholds.end()) {
                throw InvalidArgument("evaluate_detections: no IoU threshold for class " +
                                      std::string(class_name(cls)));
            }
            thresholds = {it->second};
        }
        double class_sum = 0.0;
        for (const double threshold : thresholds) {
            MatchConfig match;
            match.mode = config.mode;
            match.distance_threshold = threshold;
            match.iou_type = config.iou_type;
            match.iou_thresholds = {{cls, threshold}};
            std::vector<bool> tp;
            std::vector<double> scores;
            for (const DetectionFrame& frame : frames) {
                std::vector<Box3D> preds, gts;
                for (const Box3D& p : frame.preds) {
                    if (p.cls == cls) preds.push_back(p);
                }
                for (const Box3D& g : frame.gts) {
                    if (g.cls == cls) gts.push_back(g);
                }
                const MatchResult m = match_detections(preds, gts, match);
                tp.insert(tp.end(), m.tp.begin(), m.tp.end());
                scores.insert(scores.end(), m.scores.begin(), m.scores.end());
            }
            const double ap = average_precision(tp, scores, gt_count[cls], config.ap);
            report.entries.push_back({cls, threshold, ap});
            class_sum += ap;
        }
        report.class_ap[cls] = class_sum / static_cast<double>(thresholds.size());
    }
    double sum = 0.0;
    for (const auto& [cls, ap] : report.class_ap) {
        sum += ap;
    }
    report.map = sum / static_cast<double>(report.class_ap.size());
    return report;
}

std::string detection_report_csv(const DetectionReport& report) {
    const std::string mode(mode_name(report.mode));
    std::ostringstream out;
    out << "class,mode,threshold,AP\n";
    for (const ApEntry& e : report.entries) {
        out << class_name(e.cls) << ',' << mode << ',' << format_number(e.threshold) << ','
            << format_number(e.ap) << '\n';
    }
    for (const auto& [cls, ap] : report.class_ap) {
        out << class_name(cls) << ',' << mode << ",mean," << format_number(ap) << '\n';
    }
    out << "mAP," << mode << ",mean," << format_number(report.map) << '\n';
    return out.str();
}

std::string detection_report_text(const DetectionReport& report) {
    std::ostringstream out;
    out << "detection AP (" << mode_name(report.mode) << ")\n";
    for (const auto& [cls, ap] : report.class_ap) {
        out << "  " << class_name(cls) << ": " << format_number(ap) << '\n';
    }
    out << "  mAP: " << format_number(report.map) << '\n';
    return out.str();
}

std::string flow_metrics_csv(const FlowMetrics& m) {
    std::ostringstream out;
    out << "EPE,AccS,AccR,ROutliers,n_points\n"
        << format_number(m.epe) << ',' << format_number(m.acc_s) << ',' << format_number(m.acc_r) << ','
        << format_number(m.r_outliers) << ',' << m.n_points << '\n';
    return out.str();
}

std::string flow_metrics_text(const FlowMetrics& m) {
    std::ostringstream out;
    out << "EPE " << format_number(m.epe) << " m, AccS " << format_number(m.acc_s) << " %, AccR "
        << format_number(m.acc_r) << " %, ROutliers " << format_number(m.r_outliers) << " % over "
        << m.n_points << " points\n";
    return out.str();
}

}  // namespace sweepalign
