#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sweepalign/scene_sim.hpp"

namespace sweepalign {

using Json = nlohmann::ordered_json;

inline constexpr int kSequenceFormatVersion = 1;
inline constexpr std::string_view kSequenceFormatTag = "sweepalign.sequence";

// Sequence container, version 1. A single JSON object whose keys appear in
// this fixed order:
//
//   format        "sweepalign.sequence"
//   version       1
//   config        scenario echo (see config_to_json)
//   num_sweeps    K + 1
//   length_scale  accumulated global scale factor
//   sweeps        [{k, ego_pose[7], n, points[3n], source_ids[n]}, ...]
//   trajectories  [{object_id, class, size[3], poses[[7], ...]}, ...]
//   keyframe_boxes [{center[3], size[3], yaw, class, object_id?, score?}, ...]
//
// Poses are (tx, ty, tz, qw, qx, qy, qz). Points are flat x,y,z triples in
// the sweep's ego frame. Doubles are written in shortest round-trip form, so
// read(write(s)) reproduces every field bit for bit. Unknown keys are
// skipped with a warning; a different version raises VersionError.
Json config_to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(const Json& node, std::vector<std::string>* warnings = nullptr);

Json pose_to_json(const RigidTransform& pose);
RigidTransform pose_from_json(const Json& node, const std::string& where);
Json box_to_json(const Box3D& box);
Box3D box_from_json(const Json& node, const std::string& where,
                    std::vector<std::string>* warnings = nullptr);

Json sequence_to_json(const SequenceSample& sample);
SequenceSample sequence_from_json(const Json& node, std::vector<std::string>* warnings = nullptr);

std::string serialize_sequence(const SequenceSample& sample);
// Throws ParseError (with line/column or field path) or VersionError.
SequenceSample parse_sequence(std::string_view text, std::vector<std::string>* warnings = nullptr);

void write_sequence(const SequenceSample& sample, const std::filesystem::path& path);
SequenceSample read_sequence(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr);

// Shared helpers for other containers built on the same conventions.
Json parse_json_text(std::string_view text);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
void warn_unknown_keys(const Json& node, std::initializer_list<std::string_view> known,
                       const std::string& where, std::vector<std::string>* warnings);
const Json& require_field(const Json& node, std::string_view key, const std::string& where);

}  // namespace sweepalign
