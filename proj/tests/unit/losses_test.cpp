#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sweepalign/errors.hpp"
#include "sweepalign/losses.hpp"
#include "sweepalign/scene_sim.hpp"

using namespace sweepalign;

namespace {

ClassScores random_scores(std::mt19937_64& rng) {
    std::gamma_distribution<double> g(1.0, 1.0);
    ClassScores s{g(rng) + 1e-3, g(rng) + 1e-3, g(rng) + 1e-3};
    const double sum = s[0] + s[1] + s[2];
    for (double& v : s) v /= sum;
    return s;
}

std::vector<std::array<double, 3>> as_arrays(const std::vector<ClassScores>& s) {
    return {s.begin(), s.end()};
}

std::vector<int> as_ints(const std::vector<ClassLabel>& labels) {
    std::vector<int> out;
    for (const ClassLabel l : labels) out.push_back(static_cast<int>(l));
    return out;
}

}  // namespace

TEST_CASE("smooth_l1 examples") {
    CHECK(smooth_l1(Vec3(0.5, 0, 0)) == 0.125);
    CHECK(smooth_l1(Vec3(2.0, 0, 0)) == 1.5);
    CHECK(smooth_l1(Vec3(-2.0, 0.5, 0)) == 1.625);
    CHECK(smooth_l1(Vec3::Zero()) == 0.0);
    // Continuous at |x| = beta.
    CHECK(std::abs(smooth_l1(Vec3(1.0 - 1e-12, 0, 0)) - smooth_l1(Vec3(1.0, 0, 0))) < 1e-11);
    CHECK(smooth_l1(Vec3(0.1, 0, 0), 0.2) == doctest::Approx(0.025));
}

TEST_CASE("object loss") {
    const std::vector<Vec3> pts{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, -1, 0.5)};
    const SevenVector gt{Vec3(1, 2, 0), yaw_quaternion(0.3)};
    CHECK(object_loss_local(gt, gt, pts) == 0.0);
    SevenVector shifted = gt;
    shifted.t += Vec3(0.5, 0, 0);
    // Translation term plus every point shifted by the same vector.
    CHECK(object_loss_local(shifted, gt, pts) == doctest::Approx(0.125 + 0.125));
    CHECK_THROWS_AS(object_loss_local(gt, gt, std::vector<Vec3>{}), InvalidArgument);

    const std::vector<double> losses{1.0, 2.0, 6.0};
    CHECK(object_loss_total(losses).value == 3.0);
    const NormalizedLoss empty = object_loss_total(std::vector<double>{});
    CHECK(empty.empty);
    CHECK(empty.value == 0.0);
}

TEST_CASE("lovasz softmax matches brute force") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> len(1, 7), cls(0, 2);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = len(rng);
        std::vector<ClassScores> scores;
        std::vector<ClassLabel> labels;
        for (int i = 0; i < n; ++i) {
            scores.push_back(random_scores(rng));
            labels.push_back(static_cast<ClassLabel>(cls(rng)));
        }
        const double got = lovasz_softmax(scores, labels);
        CHECK(std::abs(got - oracle::lovasz_softmax_bruteforce(as_arrays(scores), as_ints(labels))) < 1e-9);
        CHECK(std::abs(got - oracle::lovasz_softmax_bruteforce(as_arrays(scores), as_ints(labels), true)) < 1e-9);
    }
}

TEST_CASE("lovasz softmax at one-hot ground truth is zero") {
    const std::vector<ClassLabel> labels{ClassLabel::Background, ClassLabel::DynamicFG, ClassLabel::StaticFG,
                                         ClassLabel::DynamicFG};
    std::vector<ClassScores> scores;
    for (const ClassLabel l : labels) scores.push_back(one_hot(l));
    CHECK(lovasz_softmax(scores, labels) == 0.0);
    CHECK_THROWS_AS(lovasz_softmax(std::vector<ClassScores>{}, std::vector<ClassLabel>{}), InvalidArgument);

    // Fully wrong single point: Jaccard loss 1.
    const std::vector<ClassScores> wrong{one_hot(ClassLabel::StaticFG)};
    CHECK(lovasz_softmax(wrong, std::vector<ClassLabel>{ClassLabel::Background}) == doctest::Approx(1.0));
}

TEST_CASE("score validation") {
    CHECK_NOTHROW(validate_scores(std::vector<ClassScores>{{0.2, 0.3, 0.5}}));
    CHECK_THROWS_AS(validate_scores(std::vector<ClassScores>{{0.2, 0.3, 0.6}}), InvalidArgument);
    CHECK_THROWS_AS(validate_scores(std::vector<ClassScores>{{-0.1, 0.6, 0.5}}), InvalidArgument);
}

TEST_CASE("weighted cross entropy") {
    const std::vector<ClassLabel> labels{ClassLabel::Background, ClassLabel::Background, ClassLabel::Background,
                                         ClassLabel::DynamicFG};
    const auto w = inverse_frequency_weights(labels);
    // N / count = 4/3 and 4, normalized to mean 1 over the present classes.
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[2] == doctest::Approx(1.5));
    CHECK(w[1] == 1.0);

    const std::vector<ClassScores> scores(4, ClassScores{0.5, 0.25, 0.25});
    const double expected = (3.0 * 0.5 * std::log(2.0) + 1.5 * std::log(4.0)) / 4.0;
    CHECK(weighted_cross_entropy(scores, labels, w) == doctest::Approx(expected).epsilon(1e-12));

    // A zero probability is clamped rather than infinite.
    const std::vector<ClassScores> certain(4, ClassScores{1.0, 0.0, 0.0});
    CHECK(std::isfinite(weighted_cross_entropy(certain, labels, w)));
    CHECK_THROWS_AS(classification_loss(scores, labels, std::array<double, 3>{1.0, 0.0, 1.0}), InvalidArgument);
}

TEST_CASE("offset and consistency losses") {
    const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(1, 0, 0)};
    const std::vector<RigidTransform> shift(2, RigidTransform::from_translation(Vec3(2, 0, 0)));
    const std::vector<Vec3> exact(2, Vec3(2, 0, 0));
    CHECK(offset_loss(pts, exact, shift).value == 0.0);
    const std::vector<Vec3> short_flow(2, Vec3(1.5, 0, 0));
    CHECK(offset_loss(pts, short_flow, shift).value == 0.125);
    CHECK(consistency_loss(pts, short_flow, shift).value == 0.125);
    const NormalizedLoss none = offset_loss(std::vector<Vec3>{}, std::vector<Vec3>{}, std::vector<RigidTransform>{});
    CHECK(none.empty);
    CHECK(none.value == 0.0);
    CHECK_THROWS_AS(offset_loss(pts, std::vector<Vec3>(1), shift), InvalidArgument);
}

TEST_CASE("total loss sums its parts") {
    LossInputs in;
    in.local_groups.push_back(ObjectTerm{SevenVector{Vec3(0.5, 0, 0), Quat::Identity()}, SevenVector{},
                                         {Vec3(0, 0, 0)}});
    in.scores = {ClassScores{0.7, 0.2, 0.1}, ClassScores{0.1, 0.1, 0.8}};
    in.labels = {ClassLabel::Background, ClassLabel::DynamicFG};
    in.dyn_points = {Vec3(0, 0, 0)};
    in.dyn_pred_flows = {Vec3(1.5, 0, 0)};
    in.dyn_gt_transforms = {RigidTransform::from_translation(Vec3(2, 0, 0))};
    in.dyn_pred_transforms = {RigidTransform::from_translation(Vec3(1, 0, 0))};
    in.l_rpn = 0.75;
    const LossBreakdown b = total_loss(in);
    CHECK(b.l_objects == doctest::Approx(0.25));
    CHECK(b.l_offset == 0.125);
    CHECK(b.l_consistent == 0.125);
    CHECK(b.l_cls == doctest::Approx(classification_loss(in.scores, in.labels)));
    CHECK(b.l_points == doctest::Approx(b.l_cls + b.l_offset + b.l_consistent));
    CHECK(b.l_total == doctest::Approx(b.l_objects + b.l_points + 0.75));

    LossInputs empty;
    empty.scores = {ClassScores{1, 0, 0}};
    empty.labels = {ClassLabel::Background};
    const LossBreakdown e = total_loss(empty);
    CHECK(e.no_local_groups);
    CHECK(e.no_dynamic_points);
    CHECK(std::isfinite(e.l_total));
}

TEST_CASE("losses vanish at ground truth and perturbations stay isolated") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        c.min_object_speed = 2.0;
        const SequenceSample s = generate_sequence(c);
        MergedCloud m = emc_merge(s);
        annotate_ground_truth(m, s.trajectories);
        const Segmentation seg = segment_dynamic_points(m, GroupingMode::Instance);
        std::vector<LocalGroup> locals;
        for (const GlobalGroup& g : seg.groups) {
            const auto l = split_local_groups(g, m.points, m.timestamp);
            locals.insert(locals.end(), l.begin(), l.end());
        }
        const auto gt = predict_group_rectifications(m, locals, s.trajectories, RectificationSource::GroundTruth);
        std::vector<ClassScores> scores;
        for (const ClassLabel l : m.labels) scores.push_back(one_hot(l));

        const LossInputs perfect = assemble_loss_inputs(m, seg, locals, gt, s.trajectories, m.gt_flow, scores);
        const LossBreakdown zero = total_loss(perfect);
        CHECK(zero.l_objects == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(zero.l_offset < 1e-20);
        CHECK(zero.l_consistent < 1e-20);
        CHECK(zero.l_total < 1e-9);

        // Only the flow of one dynamic point changes: object and
        // classification terms stay put.
        std::vector<Vec3> flows = m.gt_flow;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.labels[i] == ClassLabel::DynamicFG) {
                flows[i] += Vec3(0.3, 0, 0);
                break;
            }
        }
        const LossBreakdown bumped =
            total_loss(assemble_loss_inputs(m, seg, locals, gt, s.trajectories, flows, scores));
        if (!zero.no_dynamic_points) {
            CHECK(bumped.l_offset > 0.0);
            CHECK(bumped.l_consistent > 0.0);
        }
        CHECK(bumped.l_objects == zero.l_objects);
        CHECK(bumped.l_cls == zero.l_cls);
    }
}
