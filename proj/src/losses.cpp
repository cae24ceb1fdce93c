#include "sweepalign/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

constexpr double kProbabilityFloor = 1e-12;

std::size_t label_index(ClassLabel label) { return static_cast<std::size_t>(label); }

NormalizedLoss residual_loss(std::span<const Vec3> points, std::span<const Vec3> flows,
                             std::span<const RigidTransform> transforms, double beta,
                             const char* what) {
    if (flows.size() != points.size() || transforms.size() != points.size()) {
        throw InvalidArgument(std::string(what) + ": points, flows and transforms differ in length");
    }
    if (points.empty()) {
        return {0.0, true};
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        sum += smooth_l1(Vec3(points[i] + flows[i] - transforms[i] * points[i]), beta);
    }
    return {sum / static_cast<double>(points.size()), false};
}

}  // namespace

double smooth_l1(std::span<const double> x, double beta) {
    if (!(beta > 0.0)) {
        throw InvalidArgument("smooth_l1: beta must be > 0");
    }
    double sum = 0.0;
    for (const double v : x) {
        const double a = std::abs(v);
        sum += a < beta ? 0.5 * v * v / beta : a - 0.5 * beta;
    }
    return sum;
}

double smooth_l1(const Vec3& x, double beta) {
    return smooth_l1(std::span<const double>(x.data(), 3), beta);
}

double object_loss_local(const SevenVector& pred, const SevenVector& gt,
                         std::span<const Vec3> group_points, double beta) {
    if (group_points.empty()) {
        throw InvalidArgument("object_loss_local: empty group");
    }
    const double translation = smooth_l1(Vec3(pred.t - gt.t), beta);
    const double rotation = rotation_frobenius_distance(pred.q, gt.q);
    const RigidTransform pred_tf = pred.to_transform();
    const RigidTransform gt_tf = gt.to_transform();
    double recon = 0.0;
    for (const Vec3& p : group_points) {
        recon += smooth_l1(Vec3(pred_tf * p - gt_tf * p), beta);
    }
    recon /= static_cast<double>(group_points.size());
    return translation + rotation + recon;
}

NormalizedLoss object_loss_total(std::span<const double> local_losses) {
    if (local_losses.empty()) {
        return {0.0, true};
    }
    const double sum = std::accumulate(local_losses.begin(), local_losses.end(), 0.0);
    return {sum / static_cast<double>(local_losses.size()), false};
}

void validate_scores(std::span<const ClassScores> scores) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double sum = 0.0;
        for (const double p : scores[i]) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw InvalidArgument("class scores of point " + std::to_string(i) +
                                      " fall outside [0, 1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw InvalidArgument("class scores of point " + std::to_string(i) + " do not sum to 1");
        }
    }
}

ClassScores one_hot(ClassLabel label) {
    ClassScores scores{0.0, 0.0, 0.0};
    scores[label_index(label)] = 1.0;
    return scores;
}

double lovasz_softmax(std::span<const ClassScores> scores, std::span<const ClassLabel> labels) {
    if (scores.empty()) {
        throw InvalidArgument("lovasz_softmax: empty input");
    }
    if (scores.size() != labels.size()) {
        throw InvalidArgument("lovasz_softmax: scores and labels differ in length");
    }
    validate_scores(scores);
    const std::size_t n = scores.size();
    std::vector<double> errors(n);
    std::vector<std::size_t> order(n);
    double total = 0.0;
    int present = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        double gts = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool fg = label_index(labels[i]) == c;
            gts += fg ? 1.0 : 0.0;
            errors[i] = std::abs((fg ? 1.0 : 0.0) - scores[i][c]);
        }
        if (gts == 0.0) {
            continue;
        }
        ++present;
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return errors[a] > errors[b]; });
        // Jaccard loss of the growing prefix of sorted errors; its increments
        // are the Lovasz gradient.
        double cum_fg = 0.0;
        double cum_bg = 0.0;
        double previous = 0.0;
        double loss = 0.0;
        for (const std::size_t i : order) {
            const bool fg = label_index(labels[i]) == c;
            cum_fg += fg ? 1.0 : 0.0;
            cum_bg += fg ? 0.0 : 1.0;
            const double jaccard = 1.0 - (gts - cum_fg) / (gts + cum_bg);
            loss += errors[i] * (jaccard - previous);
            previous = jaccard;
        }
        total += loss;
    }
    return total / present;
}

std::array<double, 3> inverse_frequency_weights(std::span<const ClassLabel> labels) {
    std::array<double, 3> counts{0.0, 0.0, 0.0};
    for (const ClassLabel label : labels) {
        counts[label_index(label)] += 1.0;
    }
    std::array<double, 3> weights{1.0, 1.0, 1.0};
    double sum = 0.0;
    int present = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        if (counts[c] > 0.0) {
            weights[c] = static_cast<double>(labels.size()) / counts[c];
            sum += weights[c];
            ++present;
        }
    }
    if (present > 0) {
        const double mean = sum / present;
        for (std::size_t c = 0; c < 3; ++c) {
            if (counts[c] > 0.0) {
                weights[c] /= mean;
            }
        }
    }
    return weights;
}

double weighted_cross_entropy(std::span<const ClassScores> scores, std::span<const ClassLabel> labels,
                              const std::array<double, 3>& weights) {
    if (scores.empty()) {
        throw InvalidArgument("weighted_cross_entropy: empty input");
    }
    if (scores.size() != labels.size()) {
        throw InvalidArgument("weighted_cross_entropy: scores and labels differ in length");
    }
    for (const double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw InvalidArgument("weighted_cross_entropy: class weights must be > 0");
        }
    }
    validate_scores(scores);
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const std::size_t y = label_index(labels[i]);
        sum += weights[y] * -std::log(std::max(scores[i][y], kProbabilityFloor));
    }
    return sum / static_cast<double>(scores.size());
}

double classification_loss(std::span<const ClassScores> scores, std::span<const ClassLabel> labels,
                           std::optional<std::array<double, 3>> weights) {
    const auto w = weights.value_or(inverse_frequency_weights(labels));
    return weighted_cross_entropy(scores, labels, w) + lovasz_softmax(scores, labels);
}

NormalizedLoss offset_loss(std::span<const Vec3> dyn_points, std::span<const Vec3> pred_flows,
                           std::span<const RigidTransform> gt_transforms, double beta) {
    return residual_loss(dyn_points, pred_flows, gt_transforms, beta, "offset_loss");
}

NormalizedLoss consistency_loss(std::span<const Vec3> dyn_points, std::span<const Vec3> pred_flows,
                                std::span<const RigidTransform> pred_transforms, double beta) {
    return residual_loss(dyn_points, pred_flows, pred_transforms, beta, "consistency_loss");
}

LossBreakdown total_loss(const LossInputs& inputs) {
    LossBreakdown out;
    std::vector<double> local;
    local.reserve(inputs.local_groups.size());
    for (const ObjectTerm& term : inputs.local_groups) {
        local.push_back(object_loss_local(term.pred, term.gt, term.points, inputs.beta));
    }
    const NormalizedLoss objects = object_loss_total(local);
    out.l_objects = objects.value;
    out.no_local_groups = objects.empty;

    out.l_cls = classification_loss(inputs.scores, inputs.labels, inputs.class_weights);
    const NormalizedLoss offset =
        offset_loss(inputs.dyn_points, inputs.dyn_pred_flows, inputs.dyn_gt_transforms, inputs.beta);
    const NormalizedLoss consistent = consistency_loss(inputs.dyn_points, inputs.dyn_pred_flows,
                                                       inputs.dyn_pred_transforms, inputs.beta);
    out.l_offset = offset.value;
    out.l_consistent = consistent.value;
    out.no_dynamic_points = offset.empty;
    out.l_points = out.l_cls + out.l_offset + out.l_consistent;
    out.l_rpn = inputs.l_rpn;
    out.l_total = out.l_objects + out.l_points + out.l_rpn;
    return out;
}

LossInputs assemble_loss_inputs(const MergedCloud& merged, const Segmentation& segmentation,
                                std::span<const LocalGroup> local_groups,
                                std::span<const GroupRectification> predicted,
                                std::span<const ObjectTrajectory> trajectories,
                                std::span<const Vec3> pred_flows, std::vector<ClassScores> scores) {
    merged.validate();
    if (pred_flows.size() != merged.size() || scores.size() != merged.size() ||
        segmentation.group_of_point.size() != merged.size()) {
        throw InvalidArgument("assemble_loss_inputs: per-point inputs do not match the cloud");
    }
    LossInputs inputs;
    inputs.scores = std::move(scores);
    inputs.labels = merged.labels;

    const GroupTransforms pred_tf = to_group_transforms(predicted);
    const std::vector<GroupRectification> gt_rects = predict_group_rectifications(
        merged, local_groups, trajectories, RectificationSource::GroundTruth);
    std::map<GroupKey, SevenVector> gt_by_key;
    for (const GroupRectification& rect : gt_rects) {
        gt_by_key.emplace(rect.key, rect.transform);
    }
    std::map<GroupKey, SevenVector> pred_by_key;
    for (const GroupRectification& rect : predicted) {
        pred_by_key.emplace(rect.key, rect.transform);
    }

    for (const LocalGroup& local : local_groups) {
        const GroupKey key{local.group, local.k};
        ObjectTerm term;
        term.gt = gt_by_key.at(key);
        const auto it = pred_by_key.find(key);
        term.pred = it == pred_by_key.end() ? SevenVector{} : it->second;
        term.points.reserve(local.members.size());
        for (const std::size_t i : local.members) {
            term.points.push_back(merged.points[i]);
        }
        inputs.local_groups.push_back(std::move(term));
    }

    std::unordered_map<int, const ObjectTrajectory*> by_id;
    for (const ObjectTrajectory& traj : trajectories) {
        by_id.emplace(traj.object_id, &traj);
    }
    std::map<GroupKey, RigidTransform> gt_cache;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (merged.labels[i] != ClassLabel::DynamicFG) {
            continue;
        }
        const GroupKey instance_key{merged.instance[i], merged.timestamp[i]};
        auto gt_it = gt_cache.find(instance_key);
        if (gt_it == gt_cache.end()) {
            const auto traj = by_id.find(instance_key.group);
            if (traj == by_id.end()) {
                throw InvalidArgument("assemble_loss_inputs: unknown instance id " +
                                      std::to_string(instance_key.group));
            }
            gt_it = gt_cache.emplace(instance_key, gt_rectification_transform(*traj->second, instance_key.k)).first;
        }
        const int group = segmentation.group_of_point[i];
        const auto pred_it = pred_tf.find(GroupKey{group, merged.timestamp[i]});
        inputs.dyn_points.push_back(merged.points[i]);
        inputs.dyn_pred_flows.push_back(pred_flows[i]);
        inputs.dyn_gt_transforms.push_back(gt_it->second);
        inputs.dyn_pred_transforms.push_back(group == kNoise || pred_it == pred_tf.end()
                                                 ? RigidTransform::identity()
                                                 : pred_it->second);
    }
    return inputs;
}

}  // namespace sweepalign
