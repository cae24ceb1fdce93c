// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sweepalign/alignment.hpp"
#include "sweepalign/augmentation.hpp"
#include "sweepalign/losses.hpp"
#include "sweepalign/metrics.hpp"
#include "sweepalign/motion.hpp"
#include "sweepalign/pipeline.hpp"
#include "sweepalign/scene_sim.hpp"

using namespace sweepalign;

namespace {

constexpr double kZeroFlowTol = 1e-9;
constexpr double kZeroFlowSeconds = 10.0;
constexpr double kOracleFitTol = 1e-6;
constexpr double kNoiseSigma = 0.05;
constexpr double kNoisyMedianEpe = 0.05;
constexpr double kEmcExtentTol = 0.1;
constexpr double kRectifiedExtentTol = 0.2;  // two 0.1 m grid cells
constexpr double kLovaszTol = 1e-9;
constexpr double kZeroLossTol = 1e-9;
constexpr double kMonteCarloTol = 1e-3;
constexpr double kAnalyticIouTol = 1e-9;
constexpr double kFixtureEpeTol = 1e-12;
constexpr double kEquivarianceTol = 1e-9;
constexpr double kBenchSeconds = 1.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::vector<LocalGroup> all_local_groups(const MergedCloud& m, const Segmentation& seg) {
    std::vector<LocalGroup> out;
    for (const GlobalGroup& g : seg.groups) {
        const auto l = split_local_groups(g, m.points, m.timestamp);
        out.insert(out.end(), l.begin(), l.end());
    }
    return out;
}

std::vector<bool> dynamic_mask(const MergedCloud& m) {
    std::vector<bool> mask(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) mask[i] = m.labels[i] == ClassLabel::DynamicFG;
    return mask;
}

// ---------------------------------------------------------------------------

Outcome ac1_zero_flow() {
    const auto start = Clock::now();
    std::vector<Vec3> pred, gt;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        c.ego_yaw_rate = 0.1;
        const SequenceSample s = generate_sequence(c);
        MergedCloud m = emc_merge(s);
        annotate_ground_truth(m, s.trajectories);
        const Segmentation seg = segment_dynamic_points(m, GroupingMode::Instance);
        const auto locals = all_local_groups(m, seg);
        const auto rect = predict_group_rectifications(m, locals, s.trajectories, RectificationSource::GroundTruth);
        const auto rectified = rectify_by_transform(m, to_group_transforms(rect));
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.labels[i] != ClassLabel::DynamicFG) continue;
            pred.push_back(rectified[i] - m.points[i]);
            gt.push_back(m.gt_flow[i]);
        }
    }
    const FlowMetrics f = scene_flow_metrics(pred, gt);
    const double elapsed = seconds_since(start);
    Outcome o;
    o.pass = f.epe <= kZeroFlowTol && f.acc_s == 100.0 && f.acc_r == 100.0 && f.r_outliers == 0.0 &&
             elapsed < kZeroFlowSeconds;
    char buf[256];
    std::snprintf(buf, sizeof buf, "EPE=%.3g AccS=%.1f AccR=%.1f ROut=%.1f over %zu dynamic points, %.2f s",
                  f.epe, f.acc_s, f.acc_r, f.r_outliers, f.n_points, elapsed);
    o.detail = buf;
    return o;
}

Outcome ac2_oracle_fit() {
    double worst_t = 0.0, worst_r = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        c.max_yaw_rate = 0.5;
        c.ego_yaw_rate = 0.15;
        const SequenceSample s = generate_sequence(c);
        MergedCloud m = emc_merge(s);
        annotate_ground_truth(m, s.trajectories);
        const Segmentation seg = segment_dynamic_points(m, GroupingMode::Instance);
        const auto locals = all_local_groups(m, seg);
        const auto fit = predict_group_rectifications(m, locals, s.trajectories, RectificationSource::OracleFit);
        const auto gt = predict_group_rectifications(m, locals, s.trajectories, RectificationSource::GroundTruth);
        for (std::size_t i = 0; i < fit.size(); ++i) {
            worst_t = std::max(worst_t, (fit[i].transform.t - gt[i].transform.t).norm());
            worst_r = std::max(worst_r, rotation_frobenius_distance(fit[i].transform.q, gt[i].transform.q));
        }
    }

    std::vector<double> epes;
    std::size_t smallest_group = SIZE_MAX;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ScenarioConfig c;
        c.seed = 1000 + seed;
        c.noise_sigma = kNoiseSigma;
        c.min_object_speed = 2.0;
        c.points_per_object_per_sweep = 200;
        PipelineConfig config;
        const AlignmentResult r = run_alignment(generate_sequence(c), config);
        for (const LocalGroup& l : r.local_groups) smallest_group = std::min(smallest_group, l.members.size());
        const auto mask = dynamic_mask(r.merged);
        if (std::find(mask.begin(), mask.end(), true) == mask.end()) continue;
        epes.push_back(scene_flow_metrics(r.pred_flows, r.merged.gt_flow, mask).epe);
    }
    std::sort(epes.begin(), epes.end());
    const double median = epes.empty() ? INFINITY
                                       : (epes.size() % 2 == 1 ? epes[epes.size() / 2]
                                                               : 0.5 * (epes[epes.size() / 2 - 1] + epes[epes.size() / 2]));
    Outcome o;
    o.pass = worst_t <= kOracleFitTol && worst_r <= kOracleFitTol && median <= kNoisyMedianEpe &&
             smallest_group >= 50 && epes.size() >= 50;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "noiseless max |dt|=%.2e max dR=%.2e; sigma=%.2f median EPE=%.4f m over %zu seeds, "
                  "smallest local group %zu pts",
                  worst_t, worst_r, kNoiseSigma, median, epes.size(), smallest_group);
    o.detail = buf;
    return o;
}

Outcome ac3_shadow() {
    const double length = 4.5;
    const std::vector<double> speeds{2.0, 5.0, 10.0};
    ScenarioConfig c;
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        ObjectSpec car;
        car.size = Vec3(length, 1.9, 1.7);
        car.x = -10.0;
        car.y = -12.0 + 8.0 * static_cast<double>(i);
        car.speed = speeds[i];
        c.objects.push_back(car);
    }
    const SequenceSample s = generate_sequence(c);
    const AlignmentResult r = run_alignment(s);
    const auto rows = measure_shadow(s, r);
    Outcome o;
    o.pass = rows.size() == speeds.size();
    std::string detail;
    for (std::size_t i = 0; i < rows.size() && i < speeds.size(); ++i) {
        const double window = c.sweep_period * (c.num_sweeps - 1);
        const double expected_emc = length + window * speeds[i];
        const bool ok = std::abs(rows[i].emc_extent - expected_emc) <= kEmcExtentTol &&
                        std::abs(rows[i].rectified_extent - length) <= kRectifiedExtentTol;
        o.pass = o.pass && ok;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%sv=%g: EMC %.3f (want %.3f) rectified %.3f", i ? "; " : "", speeds[i],
                      rows[i].emc_extent, expected_emc, rows[i].rectified_extent);
        detail += buf;
    }
    o.detail = detail;
    return o;
}

Outcome ac4_lovasz() {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> len(1, 8), cls(0, 2);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    double worst = 0.0;
    for (int batch = 0; batch < 1000; ++batch) {
        const int n = len(rng);
        std::vector<ClassScores> scores;
        std::vector<ClassLabel> labels;
        std::vector<std::array<double, 3>> probs;
        std::vector<int> ints;
        for (int i = 0; i < n; ++i) {
            ClassScores p{gamma(rng) + 1e-3, gamma(rng) + 1e-3, gamma(rng) + 1e-3};
            const double sum = p[0] + p[1] + p[2];
            for (double& v : p) v /= sum;
            const int y = cls(rng);
            scores.push_back(p);
            probs.push_back(p);
            labels.push_back(static_cast<ClassLabel>(y));
            ints.push_back(y);
        }
        worst = std::max(worst, std::abs(lovasz_softmax(scores, labels) - oracle::lovasz_softmax_bruteforce(probs, ints)));
    }
    Outcome o;
    o.pass = worst <= kLovaszTol;
    char buf[120];
    std::snprintf(buf, sizeof buf, "max |diff| vs permutation oracle = %.2e over 1000 batches", worst);
    o.detail = buf;
    return o;
}

Outcome ac5_losses() {
    double worst_zero = 0.0;
    bool isolated = true;
    int sequences = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        c.ego_yaw_rate = 0.1;
        c.max_yaw_rate = 0.3;
        const SequenceSample s = generate_sequence(c);
        MergedCloud m = emc_merge(s);
        annotate_ground_truth(m, s.trajectories);
        const Segmentation seg = segment_dynamic_points(m, GroupingMode::Instance);
        const auto locals = all_local_groups(m, seg);
        const auto gt = predict_group_rectifications(m, locals, s.trajectories, RectificationSource::GroundTruth);
        std::vector<ClassScores> scores;
        for (const ClassLabel l : m.labels) scores.push_back(one_hot(l));
        const LossBreakdown zero =
            total_loss(assemble_loss_inputs(m, seg, locals, gt, s.trajectories, m.gt_flow, scores));
        worst_zero = std::max(worst_zero, std::abs(zero.l_total));
        ++sequences;
        if (zero.no_dynamic_points) continue;

        std::vector<Vec3> flows = m.gt_flow;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.labels[i] == ClassLabel::DynamicFG) flows[i] += Vec3(0.2, -0.1, 0.05);
        }
        const LossBreakdown fb = total_loss(assemble_loss_inputs(m, seg, locals, gt, s.trajectories, flows, scores));
        isolated = isolated && fb.l_objects == zero.l_objects && fb.l_cls == zero.l_cls && fb.l_offset > 0.0 &&
                   fb.l_consistent > 0.0;

        auto perturbed = gt;
        for (GroupRectification& r : perturbed) {
            if (r.key.k > 0) r.transform.t += Vec3(0.3, 0.0, 0.0);
        }
        const LossBreakdown tb =
            total_loss(assemble_loss_inputs(m, seg, locals, perturbed, s.trajectories, m.gt_flow, scores));
        isolated = isolated && tb.l_offset == zero.l_offset && tb.l_cls == zero.l_cls && tb.l_objects > 0.0 &&
                   tb.l_consistent > 0.0;
    }
    Outcome o;
    o.pass = worst_zero <= kZeroLossTol && isolated;
    char buf[200];
    std::snprintf(buf, sizeof buf, "max |L_total| at gt = %.2e over %d sequences; perturbation isolation %s",
                  worst_zero, sequences, isolated ? "holds" : "violated");
    o.detail = buf;
    return o;
}

Outcome ac6_iou() {
    auto make = [](double x, double y, double l, double w, double yaw) {
        Box3D b;
        b.center = Vec3(x, y, 0);
        b.size = Vec3(l, w, 1);
        b.yaw = yaw;
        return b;
    };
    const Box3D unit = make(0, 0, 1, 1, 0);
    const double analytic = std::max(std::abs(bev_iou(unit, unit) - 1.0),
                                     std::abs(bev_iou(unit, make(0.5, 0, 1, 1, 0)) - 1.0 / 3.0));

    std::mt19937_64 rng(606), mc(607);
    std::uniform_real_distribution<double> pos(-1.5, 1.5), len(0.5, 4.0), ang(-kPi, kPi);
    double worst = 0.0;
    int overlapping = 0;
    for (int pair = 0; pair < 200; ++pair) {
        const Box3D a = make(pos(rng), pos(rng), len(rng), len(rng), ang(rng));
        const Box3D b = make(pos(rng), pos(rng), len(rng), len(rng), ang(rng));
        const double iou = bev_iou(a, b);
        overlapping += iou > 0.0 ? 1 : 0;
        const double est = oracle::monte_carlo_iou({a.center.x(), a.center.y(), a.size.x(), a.size.y(), a.yaw},
                                                   {b.center.x(), b.center.y(), b.size.x(), b.size.y(), b.yaw},
                                                   1000, mc);
        worst = std::max(worst, std::abs(iou - est));
    }
    Outcome o;
    o.pass = analytic <= kAnalyticIouTol && worst <= kMonteCarloTol;
    char buf[200];
    std::snprintf(buf, sizeof buf, "analytic max err %.1e; max |IoU - MC(1e6)| = %.2e over 200 pairs (%d overlapping)",
                  analytic, worst, overlapping);
    o.detail = buf;
    return o;
}

// Exhaustive reference for evaluate_detections.
DetectionReport oracle_report(const std::vector<DetectionFrame>& frames, const DetectionConfig& config) {
    DetectionReport report;
    report.mode = config.mode;
    for (const ObjectClass cls : kAllClasses) {
        std::size_t n_gt = 0;
        for (const DetectionFrame& f : frames) {
            for (const Box3D& g : f.gts) n_gt += g.cls == cls ? 1 : 0;
        }
        if (n_gt == 0) continue;
        const std::vector<double> thresholds = config.mode == MatchMode::BevDistance
                                                   ? config.distance_thresholds
                                                   : std::vector<double>{config.iou_thresholds.at(cls)};
        double class_sum = 0.0;
        for (const double thr : thresholds) {
            std::vector<std::pair<double, bool>> ranked;  // score, tp
            for (const DetectionFrame& f : frames) {
                std::vector<Box3D> preds, gts;
                for (const Box3D& p : f.preds) {
                    if (p.cls == cls) preds.push_back(p);
                }
                for (const Box3D& g : f.gts) {
                    if (g.cls == cls) gts.push_back(g);
                }
                std::stable_sort(preds.begin(), preds.end(),
                                 [](const Box3D& a, const Box3D& b) { return *a.score > *b.score; });
                std::vector<std::vector<double>> cost(preds.size());
                std::vector<std::vector<bool>> valid(preds.size());
                for (std::size_t i = 0; i < preds.size(); ++i) {
                    for (const Box3D& g : gts) {
                        if (config.mode == MatchMode::BevDistance) {
                            const double d = std::hypot(preds[i].center.x() - g.center.x(),
                                                        preds[i].center.y() - g.center.y());
                            cost[i].push_back(d);
                            valid[i].push_back(d <= thr);
                        } else {
                            const double iou = bev_iou(preds[i], g);
                            cost[i].push_back(-iou);
                            valid[i].push_back(iou >= thr);
                        }
                    }
                }
                const auto tp = oracle::enumerate_matching(cost, valid, gts.size());
                for (std::size_t i = 0; i < preds.size(); ++i) ranked.emplace_back(*preds[i].score, tp[i]);
            }
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            std::vector<bool> flags;
            for (const auto& r : ranked) flags.push_back(r.second);
            const double ap = oracle::ap_101(flags, n_gt);
            report.entries.push_back({cls, thr, ap});
            class_sum += ap;
        }
        report.class_ap[cls] = class_sum / static_cast<double>(thresholds.size());
    }
    double sum = 0.0;
    for (const auto& [cls, ap] : report.class_ap) sum += ap;
    report.map = sum / static_cast<double>(report.class_ap.size());
    return report;
}

Outcome ac7_ap() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> pos(-4.0, 4.0), jitter(-1.5, 1.5), score(0.0, 1.0), ang(-kPi, kPi);
    std::uniform_int_distribution<int> count(0, 5), frames_dist(1, 2);
    const std::vector<ObjectClass> classes{ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Bicycle};
    int mismatches = 0, instances = 0;
    while (instances < 500) {
        std::vector<DetectionFrame> frames(static_cast<std::size_t>(frames_dist(rng)));
        bool has_gt = false;
        for (DetectionFrame& f : frames) {
            for (const ObjectClass cls : classes) {
                const Vec3 size = cls == ObjectClass::Car ? Vec3(4.5, 1.9, 1.7)
                                 : cls == ObjectClass::Pedestrian ? Vec3(0.8, 0.8, 1.8)
                                                                  : Vec3(1.8, 0.6, 1.3);
                const int ng = count(rng), np = count(rng);
                for (int g = 0; g < ng; ++g) {
                    Box3D b;
                    b.cls = cls;
                    b.size = size;
                    b.center = Vec3(pos(rng), pos(rng), 0);
                    b.yaw = ang(rng);
                    f.gts.push_back(b);
                    has_gt = true;
                }
                for (int p = 0; p < np; ++p) {
                    Box3D b;
                    b.cls = cls;
                    b.size = size;
                    if (!f.gts.empty() && score(rng) < 0.7) {
                        const Box3D& near = f.gts[static_cast<std::size_t>(score(rng) * f.gts.size())];
                        b.center = near.center + Vec3(jitter(rng) * 0.5, jitter(rng) * 0.5, 0);
                        b.yaw = near.yaw + 0.2 * jitter(rng);
                    } else {
                        b.center = Vec3(pos(rng), pos(rng), 0);
                        b.yaw = ang(rng);
                    }
                    b.score = score(rng);
                    f.preds.push_back(b);
                }
            }
        }
        if (!has_gt) continue;
        ++instances;
        for (const MatchMode mode : {MatchMode::BevDistance, MatchMode::Iou}) {
            DetectionConfig config;
            config.mode = mode;
            const DetectionReport got = evaluate_detections(frames, config);
            const DetectionReport want = oracle_report(frames, config);
            bool same = got.map == want.map && got.entries.size() == want.entries.size() &&
                        got.class_ap == want.class_ap;
            for (std::size_t i = 0; same && i < got.entries.size(); ++i) {
                same = got.entries[i].cls == want.entries[i].cls && got.entries[i].ap == want.entries[i].ap &&
                       got.entries[i].threshold == want.entries[i].threshold;
            }
            mismatches += same ? 0 : 1;
        }
    }
    Outcome o;
    o.pass = mismatches == 0;
    o.detail = std::to_string(instances) + " instances x 2 modes, " + std::to_string(mismatches) +
               " reports differ from exhaustive matching";
    return o;
}

Outcome ac8_fixture() {
    const std::vector<double> errors{0.04, 0.08, 0.2, 0.35};
    std::vector<Vec3> pred, gt;
    for (const double e : errors) {
        gt.emplace_back(1.0, 0.0, 0.0);
        pred.emplace_back(1.0, e, 0.0);
    }
    const FlowMetrics f = scene_flow_metrics(pred, gt);
    Outcome o;
    o.pass = f.acc_s == 25.0 && f.acc_r == 50.0 && f.r_outliers == 25.0 && std::abs(f.epe - 0.1675) <= kFixtureEpeTol;
    char buf[160];
    std::snprintf(buf, sizeof buf, "AccS=%g AccR=%g ROutliers=%g EPE=%.17g", f.acc_s, f.acc_r, f.r_outliers, f.epe);
    o.detail = buf;
    return o;
}

double equivariance_error(const SequenceSample& s, const SequenceSample& aug,
                          const std::function<Vec3(const Vec3&)>& map) {
    MergedCloud a = emc_merge(s), b = emc_merge(aug);
    annotate_ground_truth(a, s.trajectories, scaled_dynamic_threshold(s));
    annotate_ground_truth(b, aug.trajectories, scaled_dynamic_threshold(aug));
    if (a.size() != b.size()) return INFINITY;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.labels[i] != b.labels[i]) return INFINITY;
        worst = std::max(worst, (b.gt_flow[i] - map(a.gt_flow[i])).norm());
    }
    return worst;
}

Outcome ac9_equivariance() {
    double flip = 0.0, scale = 0.0, rotate = 0.0;
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> factor(0.95, 1.05), angle(-kPi / 8, kPi / 8);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        c.ego_yaw_rate = 0.2;
        c.max_yaw_rate = 0.4;
        const SequenceSample s = generate_sequence(c);
        const FlipAxis axis = seed % 2 == 0 ? FlipAxis::X : FlipAxis::Y;
        flip = std::max(flip, equivariance_error(s, global_flip(s, axis),
                                                 [axis](const Vec3& v) { return flip_vector(v, axis); }));
        const double f = factor(rng);
        scale = std::max(scale, equivariance_error(s, global_scale(s, f), [f](const Vec3& v) { return Vec3(f * v); }));
        const double a = angle(rng);
        const Mat3 rz = yaw_quaternion(a).toRotationMatrix();
        rotate = std::max(rotate,
                          equivariance_error(s, global_rotate(s, a), [&rz](const Vec3& v) { return Vec3(rz * v); }));
    }
    Outcome o;
    o.pass = flip <= kEquivarianceTol && scale <= kEquivarianceTol && rotate <= kEquivarianceTol;
    char buf[160];
    std::snprintf(buf, sizeof buf, "max flow error flip %.1e, scale %.1e, rotate %.1e over 20 sequences each", flip,
                  scale, rotate);
    o.detail = buf;
    return o;
}

Outcome ac10_bench() {
    const int total = 100000, sweeps = 10, objects = 10;
    ScenarioConfig c;
    c.seed = 10;
    c.num_sweeps = sweeps;
    c.num_objects = objects;
    const int per_sweep = total / sweeps;
    c.points_per_object_per_sweep = (per_sweep * 3 / 10) / objects;
    c.background_points_per_sweep = per_sweep - c.points_per_object_per_sweep * objects;
    const SequenceSample s = generate_sequence(c);
    std::size_t points = 0;
    for (const SweepRecord& sw : s.sweeps) points += sw.points.size();

    std::vector<double> times;
    (void)run_alignment(s);  // warm-up
    for (int rep = 0; rep < 7; ++rep) {
        const auto start = Clock::now();
        const AlignmentResult r = run_alignment(s);
        times.push_back(seconds_since(start));
        if (r.merged.size() != points) return {false, "merged size mismatch"};
    }
    std::sort(times.begin(), times.end());
    const double median = times[times.size() / 2];
    Outcome o;
    o.pass = median < kBenchSeconds;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu points, %d sweeps: median %.3f s over %zu runs", points, sweeps, median,
                  times.size());
    o.detail = buf;
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 zero-flow round trip", ac1_zero_flow},
        {"AC2 oracle-fit recovery", ac2_oracle_fit},
        {"AC3 shadow-effect extents", ac3_shadow},
        {"AC4 Lovasz-Softmax oracle", ac4_lovasz},
        {"AC5 losses vanish at ground truth", ac5_losses},
        {"AC6 rotated IoU oracle", ac6_iou},
        {"AC7 AP oracle", ac7_ap},
        {"AC8 flow metric thresholds", ac8_fixture},
        {"AC9 augmentation equivariance", ac9_equivariance},
        {"AC10 performance envelope", ac10_bench},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
