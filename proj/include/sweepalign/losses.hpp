#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "sweepalign/alignment.hpp"
#include "sweepalign/geometry.hpp"
#include "sweepalign/motion.hpp"

namespace sweepalign {

// Sum over components of 0.5 x^2 / beta (|x| < beta) or |x| - 0.5 beta.
double smooth_l1(std::span<const double> x, double beta = 1.0);
double smooth_l1(const Vec3& x, double beta = 1.0);

// smooth_l1(t - t*) + ||Rot(q) - Rot(q*)||_F + mean_p smooth_l1(T p - T* p).
// Throws InvalidArgument on an empty group.
double object_loss_local(const SevenVector& pred, const SevenVector& gt,
                         std::span<const Vec3> group_points, double beta = 1.0);

// A mean whose denominator may be zero. Empty sets give value 0 and
// empty = true instead of NaN.
struct NormalizedLoss {
    double value = 0.0;
    bool empty = false;
};

// Mean of the per-local-group losses (over all groups of all instances).
NormalizedLoss object_loss_total(std::span<const double> local_losses);

// (background, static foreground, dynamic foreground) probabilities.
using ClassScores = std::array<double, 3>;

// Throws InvalidArgument unless every triple is a probability vector
// (components in [0, 1], sum 1 within 1e-6).
void validate_scores(std::span<const ClassScores> scores);
ClassScores one_hot(ClassLabel label);

// Multi-class Lovasz extension of the Jaccard loss, averaged over the
// classes present in `labels`. Throws InvalidArgument on empty input.
double lovasz_softmax(std::span<const ClassScores> scores, std::span<const ClassLabel> labels);

// Inverse class frequency of the batch, normalized to mean 1 over the
// classes present; absent classes get 1.
std::array<double, 3> inverse_frequency_weights(std::span<const ClassLabel> labels);

// (1 / N) sum_i w_{y_i} * -log(max(p_{i,y_i}, 1e-12)).
double weighted_cross_entropy(std::span<const ClassScores> scores, std::span<const ClassLabel> labels,
                              const std::array<double, 3>& weights);

// weighted_cross_entropy + lovasz_softmax. Weights default to
// inverse_frequency_weights(labels) and must be > 0.
double classification_loss(std::span<const ClassScores> scores, std::span<const ClassLabel> labels,
                           std::optional<std::array<double, 3>> weights = std::nullopt);

// (1 / N+) sum smooth_l1(p + o - T p), with one transform per point.
// offset_loss passes ground-truth transforms, consistency_loss predicted ones.
NormalizedLoss offset_loss(std::span<const Vec3> dyn_points, std::span<const Vec3> pred_flows,
                           std::span<const RigidTransform> gt_transforms, double beta = 1.0);
NormalizedLoss consistency_loss(std::span<const Vec3> dyn_points, std::span<const Vec3> pred_flows,
                                std::span<const RigidTransform> pred_transforms, double beta = 1.0);

struct ObjectTerm {
    SevenVector pred;
    SevenVector gt;
    std::vector<Vec3> points;
};

struct LossInputs {
    std::vector<ObjectTerm> local_groups;
    std::vector<ClassScores> scores;      // every point of the cloud
    std::vector<ClassLabel> labels;
    std::optional<std::array<double, 3>> class_weights;
    std::vector<Vec3> dyn_points;         // dynamic foreground points
    std::vector<Vec3> dyn_pred_flows;
    std::vector<RigidTransform> dyn_gt_transforms;
    std::vector<RigidTransform> dyn_pred_transforms;
    double l_rpn = 0.0;                   // detection head loss, out of scope here
    double beta = 1.0;
};

struct LossBreakdown {
    double l_objects = 0.0;
    double l_cls = 0.0;
    double l_offset = 0.0;
    double l_consistent = 0.0;
    double l_points = 0.0;  // l_cls + l_offset + l_consistent
    double l_rpn = 0.0;
    double l_total = 0.0;   // l_objects + l_points + l_rpn
    bool no_local_groups = false;
    bool no_dynamic_points = false;
};

LossBreakdown total_loss(const LossInputs& inputs);

// Builds the loss inputs for one labeled merged cloud. Ground-truth
// transforms come from the trajectories; dynamic points without a predicted
// group transform use the identity as prediction.
LossInputs assemble_loss_inputs(const MergedCloud& merged, const Segmentation& segmentation,
                                std::span<const LocalGroup> local_groups,
                                std::span<const GroupRectification> predicted,
                                std::span<const ObjectTrajectory> trajectories,
                                std::span<const Vec3> pred_flows, std::vector<ClassScores> scores);

}  // namespace sweepalign
