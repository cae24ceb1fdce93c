#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "sweepalign/alignment.hpp"
#include "sweepalign/scene_sim.hpp"

namespace sweepalign {

// X mirrors across the xz-plane (negates y), Y across the yz-plane
// (negates x).
enum class FlipAxis { X, Y };

Vec3 flip_vector(const Vec3& v, FlipAxis axis);

// Global augmentations act on the world frame. On a SequenceSample the ego
// poses are conjugated by the world map, so the keyframe ego pose stays the
// identity and the sensor points carry the change; object poses and
// keyframe boxes follow the same map. On a MergedCloud points and gt flows
// are mapped directly. Labels are untouched.
//
// Flip: box yaw becomes -yaw (X) or pi - yaw (Y).
SequenceSample global_flip(const SequenceSample& sample, FlipAxis axis);
MergedCloud global_flip(const MergedCloud& merged, FlipAxis axis);

// Multiplies points, translations, box centers and sizes, flows and
// sample.length_scale by `factor`. Throws InvalidArgument unless factor > 0
// and finite.
SequenceSample global_scale(const SequenceSample& sample, double factor);
MergedCloud global_scale(const MergedCloud& merged, double factor);

// Rotation about the world z axis; box yaw += angle. Throws InvalidArgument
// for a non-finite angle.
SequenceSample global_rotate(const SequenceSample& sample, double angle);
MergedCloud global_rotate(const MergedCloud& merged, double angle);

// Dynamic threshold that follows the sample through global scaling.
double scaled_dynamic_threshold(const SequenceSample& sample,
                                double base = kDefaultDynamicThreshold);

struct AugmentationConfig {
    double flip_probability = 0.5;  // per axis
    double min_scale = 0.95;
    double max_scale = 1.05;
    double max_rotation = kPi / 8.0;
};

struct AugmentationRecord {
    bool flip_x = false;
    bool flip_y = false;
    double scale = 1.0;
    double rotation = 0.0;
};

// Flip x, flip y, scale, rotate, in that order.
SequenceSample random_global_augment(const SequenceSample& sample, const AugmentationConfig& config,
                                     std::mt19937_64& rng, AugmentationRecord* record = nullptr);

// One annotated object with its trajectory. poses[k] is the world pose at
// step k and body_points[k] the points observed at that step, in the body
// frame.
struct GtDatabaseEntry {
    ObjectClass cls = ObjectClass::Car;
    Vec3 size = Vec3::Ones();
    Box3D keyframe_box;
    std::vector<RigidTransform> poses;
    std::vector<std::vector<Vec3>> body_points;

    int num_steps() const { return static_cast<int>(poses.size()); }
};

inline constexpr int kMaxTrajectorySteps = 10;

// One entry per trajectory with at least one keyframe point, steps capped
// at kMaxTrajectorySteps.
std::vector<GtDatabaseEntry> build_gt_database(std::span<const SequenceSample> samples);

// Places `entry` into `sample` with the world map `placement`
// (poses become placement * poses[k]) under a fresh object id, adding
// points to every covered sweep, its trajectory and its keyframe box. Returns
// the new id. Throws InvalidArgument when the entry has fewer steps than
// the sample has sweeps.
int insert_entry(SequenceSample& sample, const GtDatabaseEntry& entry, const RigidTransform& placement);

struct GtSamplingOptions {
    int max_retries = 20;  // placement attempts per requested insertion
    double max_yaw_perturbation = kPi;
};

struct GtSamplingResult {
    SequenceSample sample;
    int requested = 0;
    int inserted = 0;
    bool shortfall = false;  // fewer than requested could be placed
};

// Inserts up to n_insert database entries at random placements inside the
// sample's xy range. A placement is rejected when its keyframe box has
// bev_iou > 0 with any existing box. Only entries covering all sweeps of
// the sample are eligible. Throws InvalidArgument when none is.
GtSamplingResult gt_sampling_with_trajectory(const SequenceSample& sample,
                                             std::span<const GtDatabaseEntry> database, int n_insert,
                                             std::mt19937_64& rng, const GtSamplingOptions& options = {});

// Entries are stored as sequences whose "ego" is the object: sweep k has
// pose poses[k] and holds body_points[k].
void write_gt_database(std::span<const GtDatabaseEntry> database, const std::filesystem::path& path);
std::vector<GtDatabaseEntry> read_gt_database(const std::filesystem::path& path,
                                              std::vector<std::string>* warnings = nullptr);

}  // namespace sweepalign
