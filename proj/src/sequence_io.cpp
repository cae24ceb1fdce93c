#include "sweepalign/sequence_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

double as_double(const Json& node, const std::string& where) {
    if (!node.is_number()) {
        throw ParseError("field '" + where + "': expected a number");
    }
    return node.get<double>();
}

std::int64_t as_int(const Json& node, const std::string& where) {
    if (!node.is_number_integer()) {
        throw ParseError("field '" + where + "': expected an integer");
    }
    return node.get<std::int64_t>();
}

const Json& as_array(const Json& node, const std::string& where, std::size_t expected_size) {
    if (!node.is_array()) {
        throw ParseError("field '" + where + "': expected an array");
    }
    if (expected_size != static_cast<std::size_t>(-1) && node.size() != expected_size) {
        throw ParseError("field '" + where + "': expected " + std::to_string(expected_size) +
                         " entries, found " + std::to_string(node.size()));
    }
    return node;
}

constexpr std::size_t kAnySize = static_cast<std::size_t>(-1);

Vec3 vec3_from_json(const Json& node, const std::string& where) {
    as_array(node, where, 3);
    return {as_double(node[0], where + "[0]"), as_double(node[1], where + "[1]"),
            as_double(node[2], where + "[2]")};
}

Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace

const Json& require_field(const Json& node, std::string_view key, const std::string& where) {
    if (!node.is_object()) {
        throw ParseError("field '" + where + "': expected an object");
    }
    const auto it = node.find(std::string(key));
    if (it == node.end()) {
        throw ParseError("field '" + where + "': missing key '" + std::string(key) + "'");
    }
    return *it;
}

void warn_unknown_keys(const Json& node, std::initializer_list<std::string_view> known,
                       const std::string& where, std::vector<std::string>* warnings) {
    if (!node.is_object()) {
        return;
    }
    for (const auto& item : node.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end() && warnings) {
            warnings->push_back("ignoring unknown field '" + item.key() + "' in '" + where + "'");
        }
    }
}

Json parse_json_text(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& err) {
        // Translate the byte offset into line/column for the message.
        const std::size_t byte = std::min<std::size_t>(err.byte, text.size());
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("malformed file at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + err.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

Json config_to_json(const ScenarioConfig& config) {
    Json objects = Json::array();
    for (const ObjectSpec& spec : config.objects) {
        objects.push_back(Json{{"class", class_name(spec.cls)},
                               {"size", vec3_to_json(spec.size)},
                               {"x", spec.x},
                               {"y", spec.y},
                               {"yaw", spec.yaw},
                               {"speed", spec.speed},
                               {"yaw_rate", spec.yaw_rate}});
    }
    return Json{{"num_sweeps", config.num_sweeps},
                {"sweep_period", config.sweep_period},
                {"num_objects", config.num_objects},
                {"min_object_speed", config.min_object_speed},
                {"max_object_speed", config.max_object_speed},
                {"max_yaw_rate", config.max_yaw_rate},
                {"ego_speed", config.ego_speed},
                {"ego_yaw_rate", config.ego_yaw_rate},
                {"points_per_object_per_sweep", config.points_per_object_per_sweep},
                {"background_points_per_sweep", config.background_points_per_sweep},
                {"xy_range", config.xy_range},
                {"ground_z", config.ground_z},
                {"noise_sigma", config.noise_sigma},
                {"seed", config.seed},
                {"objects", objects}};
}

ScenarioConfig config_from_json(const Json& node, std::vector<std::string>* warnings) {
    const std::string where = "config";
    warn_unknown_keys(node,
                      {"num_sweeps", "sweep_period", "num_objects", "min_object_speed",
                       "max_object_speed", "max_yaw_rate", "ego_speed", "ego_yaw_rate",
                       "points_per_object_per_sweep", "background_points_per_sweep", "xy_range",
                       "ground_z", "noise_sigma", "seed", "objects"},
                      where, warnings);
    auto get_d = [&](const char* key) {
        return as_double(require_field(node, key, where), where + "." + key);
    };
    auto get_i = [&](const char* key) {
        return static_cast<int>(as_int(require_field(node, key, where), where + "." + key));
    };
    ScenarioConfig config;
    config.num_sweeps = get_i("num_sweeps");
    config.sweep_period = get_d("sweep_period");
    config.num_objects = get_i("num_objects");
    config.min_object_speed = get_d("min_object_speed");
    config.max_object_speed = get_d("max_object_speed");
    config.max_yaw_rate = get_d("max_yaw_rate");
    config.ego_speed = get_d("ego_speed");
    config.ego_yaw_rate = get_d("ego_yaw_rate");
    config.points_per_object_per_sweep = get_i("points_per_object_per_sweep");
    config.background_points_per_sweep = get_i("background_points_per_sweep");
    config.xy_range = get_d("xy_range");
    config.ground_z = get_d("ground_z");
    config.noise_sigma = get_d("noise_sigma");
    {
        const Json& seed = require_field(node, "seed", where);
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
            throw ParseError("field 'config.seed': expected a non-negative integer");
        }
        config.seed = seed.get<std::uint64_t>();
    }
    const Json& objects = as_array(require_field(node, "objects", where), "config.objects", kAnySize);
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const std::string w = "config.objects[" + std::to_string(i) + "]";
        const Json& o = objects[i];
        warn_unknown_keys(o, {"class", "size", "x", "y", "yaw", "speed", "yaw_rate"}, w, warnings);
        ObjectSpec spec;
        const Json& cls = require_field(o, "class", w);
        if (!cls.is_string()) {
            throw ParseError("field '" + w + ".class': expected a string");
        }
        try {
            spec.cls = class_from_name(cls.get<std::string>());
        } catch (const InvalidArgument& err) {
            throw ParseError("field '" + w + ".class': " + err.what());
        }
        spec.size = vec3_from_json(require_field(o, "size", w), w + ".size");
        spec.x = as_double(require_field(o, "x", w), w + ".x");
        spec.y = as_double(require_field(o, "y", w), w + ".y");
        spec.yaw = as_double(require_field(o, "yaw", w), w + ".yaw");
        spec.speed = as_double(require_field(o, "speed", w), w + ".speed");
        spec.yaw_rate = as_double(require_field(o, "yaw_rate", w), w + ".yaw_rate");
        config.objects.push_back(spec);
    }
    return config;
}

Json pose_to_json(const RigidTransform& pose) {
    const auto values = SevenVector::from_transform(pose).to_array();
    return Json(values);
}

RigidTransform pose_from_json(const Json& node, const std::string& where) {
    as_array(node, where, 7);
    std::array<double, 7> values{};
    for (std::size_t i = 0; i < 7; ++i) {
        values[i] = as_double(node[i], where + "[" + std::to_string(i) + "]");
    }
    // Construct directly so a stored unit quaternion is kept bit for bit.
    const Quat q(values[3], values[4], values[5], values[6]);
    if (std::abs(q.norm() - 1.0) > 1e-9) {
        throw ParseError("field '" + where + "': quaternion is not unit");
    }
    return {q, Vec3(values[0], values[1], values[2])};
}

Json box_to_json(const Box3D& box) {
    Json out{{"center", vec3_to_json(box.center)},
             {"size", vec3_to_json(box.size)},
             {"yaw", box.yaw},
             {"class", class_name(box.cls)}};
    if (box.object_id) {
        out["object_id"] = *box.object_id;
    }
    if (box.score) {
        out["score"] = *box.score;
    }
    return out;
}

Box3D box_from_json(const Json& node, const std::string& where, std::vector<std::string>* warnings) {
    warn_unknown_keys(node, {"center", "size", "yaw", "class", "object_id", "score"}, where, warnings);
    Box3D box;
    box.center = vec3_from_json(require_field(node, "center", where), where + ".center");
    box.size = vec3_from_json(require_field(node, "size", where), where + ".size");
    box.yaw = as_double(require_field(node, "yaw", where), where + ".yaw");
    const Json& cls = require_field(node, "class", where);
    if (!cls.is_string()) {
        throw ParseError("field '" + where + ".class': expected a string");
    }
    try {
        box.cls = class_from_name(cls.get<std::string>());
    } catch (const InvalidArgument& err) {
        throw ParseError("field '" + where + ".class': " + err.what());
    }
    if (node.contains("object_id")) {
        box.object_id = static_cast<int>(as_int(node["object_id"], where + ".object_id"));
    }
    if (node.contains("score")) {
        box.score = as_double(node["score"], where + ".score");
    }
    try {
        box.validate();
    } catch (const InvalidArgument& err) {
        throw ParseError("field '" + where + "': " + err.what());
    }
    return box;
}

Json sequence_to_json(const SequenceSample& sample) {
    Json sweeps = Json::array();
    for (const SweepRecord& sweep : sample.sweeps) {
        std::vector<double> flat;
        flat.reserve(sweep.points.size() * 3);
        for (const Vec3& p : sweep.points) {
            flat.push_back(p.x());
            flat.push_back(p.y());
            flat.push_back(p.z());
        }
        sweeps.push_back(Json{{"k", sweep.k},
                              {"ego_pose", pose_to_json(sweep.ego_pose)},
                              {"n", sweep.points.size()},
                              {"points", std::move(flat)},
                              {"source_ids", sweep.source_ids}});
    }
    Json trajectories = Json::array();
    for (const ObjectTrajectory& traj : sample.trajectories) {
        Json poses = Json::array();
        for (const RigidTransform& pose : traj.poses) {
            poses.push_back(pose_to_json(pose));
        }
        trajectories.push_back(Json{{"object_id", traj.object_id},
                                    {"class", class_name(traj.cls)},
                                    {"size", vec3_to_json(traj.size)},
                                    {"poses", std::move(poses)}});
    }
    Json boxes = Json::array();
    for (const Box3D& box : sample.keyframe_boxes) {
        boxes.push_back(box_to_json(box));
    }
    return Json{{"format", kSequenceFormatTag},
                {"version", kSequenceFormatVersion},
                {"config", config_to_json(sample.config)},
                {"num_sweeps", sample.sweeps.size()},
                {"length_scale", sample.length_scale},
                {"sweeps", std::move(sweeps)},
                {"trajectories", std::move(trajectories)},
                {"keyframe_boxes", std::move(boxes)}};
}

SequenceSample sequence_from_json(const Json& node, std::vector<std::string>* warnings) {
    const std::string root = "<root>";
    const Json& format = require_field(node, "format", root);
    if (!format.is_string() || format.get<std::string>() != kSequenceFormatTag) {
        throw ParseError("field 'format': expected \"" + std::string(kSequenceFormatTag) + "\"");
    }
    const auto version = as_int(require_field(node, "version", root), "version");
    if (version != kSequenceFormatVersion) {
        throw VersionError("unsupported sequence format version " + std::to_string(version) +
                           " (this build reads version " + std::to_string(kSequenceFormatVersion) +
                           ")");
    }
    warn_unknown_keys(node,
                      {"format", "version", "config", "num_sweeps", "length_scale", "sweeps",
                       "trajectories", "keyframe_boxes"},
                      root, warnings);

    SequenceSample sample;
    sample.config = config_from_json(require_field(node, "config", root), warnings);
    const auto num_sweeps = as_int(require_field(node, "num_sweeps", root), "num_sweeps");
    if (node.contains("length_scale")) {
        sample.length_scale = as_double(node["length_scale"], "length_scale");
    }

    const Json& sweeps = as_array(require_field(node, "sweeps", root), "sweeps", kAnySize);
    if (num_sweeps < 0 || static_cast<std::size_t>(num_sweeps) != sweeps.size()) {
        throw ParseError("field 'num_sweeps': header says " + std::to_string(num_sweeps) +
                         " but " + std::to_string(sweeps.size()) + " sweep blocks are present");
    }
    for (std::size_t s = 0; s < sweeps.size(); ++s) {
        const std::string w = "sweeps[" + std::to_string(s) + "]";
        const Json& block = sweeps[s];
        warn_unknown_keys(block, {"k", "ego_pose", "n", "points", "source_ids"}, w, warnings);
        SweepRecord sweep;
        sweep.k = static_cast<int>(as_int(require_field(block, "k", w), w + ".k"));
        if (sweep.k != static_cast<int>(s)) {
            throw ParseError("field '" + w + ".k': expected " + std::to_string(s));
        }
        sweep.ego_pose = pose_from_json(require_field(block, "ego_pose", w), w + ".ego_pose");
        const auto n = as_int(require_field(block, "n", w), w + ".n");
        if (n < 0) {
            throw ParseError("field '" + w + ".n': negative count");
        }
        const auto count = static_cast<std::size_t>(n);
        const Json& points = as_array(require_field(block, "points", w), w + ".points", 3 * count);
        const Json& ids = as_array(require_field(block, "source_ids", w), w + ".source_ids", count);
        sweep.points.reserve(count);
        sweep.source_ids.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const Json& x = points[3 * i];
            const Json& y = points[3 * i + 1];
            const Json& z = points[3 * i + 2];
            if (!x.is_number() || !y.is_number() || !z.is_number()) {
                throw ParseError("field '" + w + ".points[" + std::to_string(3 * i) +
                                 "]': expected numbers");
            }
            sweep.points.emplace_back(x.get<double>(), y.get<double>(), z.get<double>());
            sweep.source_ids.push_back(static_cast<int>(as_int(ids[i], w + ".source_ids")));
        }
        sample.sweeps.push_back(std::move(sweep));
    }

    const Json& trajectories =
        as_array(require_field(node, "trajectories", root), "trajectories", kAnySize);
    for (std::size_t t = 0; t < trajectories.size(); ++t) {
        const std::string w = "trajectories[" + std::to_string(t) + "]";
        const Json& block = trajectories[t];
        warn_unknown_keys(block, {"object_id", "class", "size", "poses"}, w, warnings);
        ObjectTrajectory traj;
        traj.object_id = static_cast<int>(as_int(require_field(block, "object_id", w), w + ".object_id"));
        const Json& cls = require_field(block, "class", w);
        if (!cls.is_string()) {
            throw ParseError("field '" + w + ".class': expected a string");
        }
        try {
            traj.cls = class_from_name(cls.get<std::string>());
        } catch (const InvalidArgument& err) {
            throw ParseError("field '" + w + ".class': " + err.what());
        }
        traj.size = vec3_from_json(require_field(block, "size", w), w + ".size");
        const Json& poses = as_array(require_field(block, "poses", w), w + ".poses", kAnySize);
        for (std::size_t i = 0; i < poses.size(); ++i) {
            traj.poses.push_back(pose_from_json(poses[i], w + ".poses[" + std::to_string(i) + "]"));
        }
        sample.trajectories.push_back(std::move(traj));
    }

    const Json& boxes = as_array(require_field(node, "keyframe_boxes", root), "keyframe_boxes", kAnySize);
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        sample.keyframe_boxes.push_back(
            box_from_json(boxes[b], "keyframe_boxes[" + std::to_string(b) + "]", warnings));
    }
    return sample;
}

std::string serialize_sequence(const SequenceSample& sample) {
    return sequence_to_json(sample).dump(1) + "\n";
}

SequenceSample parse_sequence(std::string_view text, std::vector<std::string>* warnings) {
    return sequence_from_json(parse_json_text(text), warnings);
}

void write_sequence(const SequenceSample& sample, const std::filesystem::path& path) {
    write_text_file(path, serialize_sequence(sample));
}

SequenceSample read_sequence(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    try {
        return parse_sequence(read_text_file(path), warnings);
    } catch (const ParseError& err) {
        throw ParseError(path.string() + ": " + err.what());
    }
}

}  // namespace sweepalign
