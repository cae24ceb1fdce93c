#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of them call into the library code they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// ---- Lovasz extension ---------------------------------------------------------

// Jaccard loss of predicting the set `pred` (bit mask) against `gt`.
inline double jaccard_loss(const std::vector<bool>& gt, const std::vector<bool>& pred) {
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        inter += (gt[i] && pred[i]) ? 1.0 : 0.0;
        uni += (gt[i] || pred[i]) ? 1.0 : 0.0;
    }
    return uni == 0.0 ? 0.0 : 1.0 - inter / uni;
}

// Lovasz extension of a set function f with f(empty) = 0, as the maximum
// over all orderings of sum_i m_pi(i) (f(S_i) - f(S_{i-1})). For submodular
// f this is the extension's support-function form; brute force over n!
// permutations.
inline double lovasz_by_permutations(const std::vector<double>& m,
                                     const std::function<double(const std::vector<bool>&)>& f) {
    const std::size_t n = m.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = -std::numeric_limits<double>::infinity();
    do {
        std::vector<bool> set(n, false);
        double previous = f(set);
        double value = 0.0;
        for (const std::size_t i : perm) {
            set[i] = true;
            const double current = f(set);
            value += m[i] * (current - previous);
            previous = current;
        }
        best = std::max(best, value);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Choquet integral form: integral over level sets {i : m_i >= t} for m >= 0.
inline double lovasz_by_level_sets(const std::vector<double>& m,
                                   const std::function<double(const std::vector<bool>&)>& f) {
    std::vector<double> levels = m;
    levels.push_back(0.0);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double value = 0.0;
    for (std::size_t j = 1; j < levels.size(); ++j) {
        std::vector<bool> set(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) set[i] = m[i] >= levels[j];
        value += (levels[j] - levels[j - 1]) * f(set);
    }
    return value;
}

// Multi-class Lovasz-Softmax: average over classes present in labels of the
// extension of the class Jaccard loss evaluated at |1{y=c} - p_c|.
inline double lovasz_softmax_bruteforce(const std::vector<std::array<double, 3>>& probs,
                                        const std::vector<int>& labels, bool use_level_sets = false) {
    double total = 0.0;
    int present = 0;
    for (int c = 0; c < 3; ++c) {
        std::vector<bool> gt(labels.size());
        bool any = false;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            gt[i] = labels[i] == c;
            any = any || gt[i];
        }
        if (!any) continue;
        ++present;
        std::vector<double> m(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) m[i] = std::abs((gt[i] ? 1.0 : 0.0) - probs[i][c]);
        // The loss of "errors on set S": predictions flipped on S.
        auto f = [&](const std::vector<bool>& errors) {
            std::vector<bool> pred(gt.size());
            for (std::size_t i = 0; i < gt.size(); ++i) pred[i] = errors[i] ? !gt[i] : gt[i];
            return jaccard_loss(gt, pred);
        };
        total += use_level_sets ? lovasz_by_level_sets(m, f) : lovasz_by_permutations(m, f);
    }
    return total / present;
}

// ---- rotated rectangle overlap by sampling ---------------------------------------

struct Rect {
    double cx, cy, l, w, yaw;
};

// Rectangle with its rotation cached for repeated containment tests.
struct RectFrame {
    double cx, cy, c, s, hl, hw;
    explicit RectFrame(const Rect& r)
        : cx(r.cx), cy(r.cy), c(std::cos(r.yaw)), s(std::sin(r.yaw)), hl(0.5 * r.l), hw(0.5 * r.w) {}
    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        return std::abs(c * dx + s * dy) <= hl && std::abs(-s * dx + c * dy) <= hw;
    }
};

inline bool inside(const Rect& r, double x, double y) { return RectFrame(r).contains(x, y); }

inline void bounds(const Rect& r, double& x0, double& x1, double& y0, double& y1) {
    const double c = std::abs(std::cos(r.yaw)), s = std::abs(std::sin(r.yaw));
    const double hx = 0.5 * (r.l * c + r.w * s), hy = 0.5 * (r.l * s + r.w * c);
    x0 = r.cx - hx;
    x1 = r.cx + hx;
    y0 = r.cy - hy;
    y1 = r.cy + hy;
}

// Jittered stratified sampling of the overlap of both bounding boxes with
// side x side cells; IoU from counts weighted by the exact rectangle areas.
inline double monte_carlo_iou(const Rect& a, const Rect& b, int side, std::mt19937_64& rng) {
    double ax0, ax1, ay0, ay1, bx0, bx1, by0, by1;
    bounds(a, ax0, ax1, ay0, ay1);
    bounds(b, bx0, bx1, by0, by1);
    const double x0 = std::max(ax0, bx0), x1 = std::min(ax1, bx1);
    const double y0 = std::max(ay0, by0), y1 = std::min(ay1, by1);
    if (x0 >= x1 || y0 >= y1) return 0.0;
    const RectFrame fa(a), fb(b);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double hx = (x1 - x0) / side, hy = (y1 - y0) / side;
    long hits = 0;
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const double x = x0 + (i + u(rng)) * hx;
            const double y = y0 + (j + u(rng)) * hy;
            hits += (fa.contains(x, y) && fb.contains(x, y)) ? 1 : 0;
        }
    }
    const double inter = static_cast<double>(hits) / (static_cast<double>(side) * side) * (x1 - x0) * (y1 - y0);
    return inter / (a.l * a.w + b.l * b.w - inter);
}

// ---- detection matching by enumeration ------------------------------------------

// Enumerates every injective partial assignment of predictions (already in
// descending score order) to ground truths. cost[i][j] is the matching cost
// (smaller is better) and valid[i][j] whether the pair passes the threshold.
// Returns the TP flags of the assignment whose per-prediction cost sequence
// (unmatched = +inf) is lexicographically smallest.
inline std::vector<bool> enumerate_matching(const std::vector<std::vector<double>>& cost,
                                            const std::vector<std::vector<bool>>& valid, std::size_t n_gt) {
    const std::size_t n = cost.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best_key(n, inf);
    std::vector<int> best_assign(n, -1);
    bool have_best = false;
    std::vector<int> assign(n, -1);
    std::vector<bool> used(n_gt, false);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == n) {
            std::vector<double> key(n);
            for (std::size_t p = 0; p < n; ++p) key[p] = assign[p] < 0 ? inf : cost[p][assign[p]];
            if (!have_best || key < best_key) {
                best_key = key;
                best_assign = assign;
                have_best = true;
            }
            return;
        }
        assign[i] = -1;
        rec(i + 1);
        for (std::size_t j = 0; j < n_gt; ++j) {
            if (used[j] || !valid[i][j]) continue;
            used[j] = true;
            assign[i] = static_cast<int>(j);
            rec(i + 1);
            used[j] = false;
            assign[i] = -1;
        }
    };
    rec(0);
    std::vector<bool> tp(n);
    for (std::size_t p = 0; p < n; ++p) tp[p] = best_assign[p] >= 0;
    return tp;
}

// 101-point interpolated AP over flags already in ranking order: mean over
// r = 0, 0.01, ..., 1 of the best precision among cut-offs reaching recall r.
inline double ap_101(const std::vector<bool>& tp_ranked, std::size_t n_gt) {
    double sum = 0.0;
    for (int r = 0; r <= 100; ++r) {
        double best = 0.0;
        std::size_t hits = 0;
        for (std::size_t cut = 0; cut < tp_ranked.size(); ++cut) {
            hits += tp_ranked[cut] ? 1 : 0;
            if (hits * 100 >= static_cast<std::size_t>(r) * n_gt) {
                best = std::max(best, static_cast<double>(hits) / static_cast<double>(cut + 1));
            }
        }
        sum += best;
    }
    return sum / 101.0;
}

}  // namespace oracle
