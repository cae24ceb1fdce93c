// sweepalign command line: simulate, align, eval-flow, eval-det, demo-shadow,
// bench. Exit codes: 0 ok, 1 usage or configuration error, 2 data error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sweepalign/errors.hpp"
#include "sweepalign/metrics.hpp"
#include "sweepalign/pipeline.hpp"
#include "sweepalign/scene_sim.hpp"
#include "sweepalign/sequence_io.hpp"
#include "sweepalign/version.hpp"

namespace fs = std::filesystem;
using namespace sweepalign;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reproducibility header shared by every text output.
std::string echo_header(const CLI::App& sub) {
    std::ostringstream out;
    out << "# sweepalign " << kVersion << ' ' << sub.get_name() << '\n';
    std::istringstream config(sub.config_to_str(true, false));
    for (std::string line; std::getline(config, line);) {
        if (!line.empty()) {
            out << "# " << line << '\n';
        }
    }
    return out.str();
}

Json echo_json(const CLI::App& sub) {
    return Json{{"tool", "sweepalign"}, {"version", kVersion}, {"command", sub.get_name()},
                {"config", sub.config_to_str(true, false)}};
}

std::string num(double v) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << v;
    return out.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

// Rows of a CSV file after its '#' comment lines, checked against `header`.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    std::vector<std::vector<std::string>> rows;
    bool seen_header = false;
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (!seen_header) {
            if (fields != header) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unexpected header");
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields");
        }
        rows.push_back(std::move(fields));
    }
    if (!seen_header) {
        throw ParseError(path.string() + ": missing header");
    }
    return rows;
}

double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": not a number: '" + s + "'");
    }
}

// ---- scenario flags ---------------------------------------------------------

struct ScenarioFlags {
    ScenarioConfig config;

    void add(CLI::App* sub) {
        sub->add_option("--sweeps", config.num_sweeps, "Sweeps per sequence (keyframe included)")
            ->capture_default_str();
        sub->add_option("--sweep-period", config.sweep_period, "Seconds between sweeps")->capture_default_str();
        sub->add_option("--objects", config.num_objects, "Randomly placed objects")->capture_default_str();
        sub->add_option("--min-speed", config.min_object_speed, "Object speed lower bound, m/s")
            ->capture_default_str();
        sub->add_option("--max-speed", config.max_object_speed, "Object speed upper bound, m/s")
            ->capture_default_str();
        sub->add_option("--max-yaw-rate", config.max_yaw_rate, "Object yaw rate bound, rad/s")
            ->capture_default_str();
        sub->add_option("--ego-speed", config.ego_speed, "Ego speed, m/s")->capture_default_str();
        sub->add_option("--ego-yaw-rate", config.ego_yaw_rate, "Ego yaw rate, rad/s")->capture_default_str();
        sub->add_option("--points-per-object", config.points_per_object_per_sweep,
                        "Surface samples per object and sweep")
            ->capture_default_str();
        sub->add_option("--background-points", config.background_points_per_sweep,
                        "Ground points per sweep")
            ->capture_default_str();
        sub->add_option("--range", config.xy_range, "Half width of the scene, m")->capture_default_str();
        sub->add_option("--noise", config.noise_sigma, "Point noise sigma, m")->capture_default_str();
    }

    ScenarioConfig validated(std::uint64_t seed) const {
        ScenarioConfig c = config;
        c.seed = seed;
        try {
            c.validate();
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
        return c;
    }
};

void add_pipeline_flags(CLI::App* sub, std::string& mode, std::string& grouping, PipelineConfig& config) {
    sub->add_option("--mode", mode, "Rectification source")
        ->check(CLI::IsMember({"gt", "oracle-fit"}))
        ->capture_default_str();
    sub->add_option("--grouping", grouping, "Dynamic point grouping")
        ->check(CLI::IsMember({"instance", "dbscan"}))
        ->capture_default_str();
    sub->add_option("--eps", config.dbscan.eps, "DBSCAN radius, m")->capture_default_str();
    sub->add_option("--min-pts", config.dbscan.min_pts, "DBSCAN core size")->capture_default_str();
}

void apply_pipeline_flags(const std::string& mode, const std::string& grouping, PipelineConfig& config) {
    config.source = mode == "gt" ? RectificationSource::GroundTruth : RectificationSource::OracleFit;
    config.grouping = grouping == "dbscan" ? GroupingMode::Dbscan : GroupingMode::Instance;
}

// ---- box files ----------------------------------------------------------------

const std::vector<std::string> kBoxHeader{"frame", "object_id", "class", "x",   "y",    "z",
                                          "length", "width",    "height", "yaw", "score"};

void write_boxes(std::ostream& out, std::uint64_t frame, const std::vector<Box3D>& boxes) {
    for (const Box3D& b : boxes) {
        out << frame << ',' << (b.object_id ? std::to_string(*b.object_id) : std::string()) << ','
            << class_name(b.cls) << ',' << num(b.center.x()) << ',' << num(b.center.y()) << ','
            << num(b.center.z()) << ',' << num(b.size.x()) << ',' << num(b.size.y()) << ','
            << num(b.size.z()) << ',' << num(b.yaw) << ',' << num(b.score.value_or(1.0)) << '\n';
    }
}

std::map<std::string, std::vector<Box3D>> read_boxes(const fs::path& path) {
    std::map<std::string, std::vector<Box3D>> frames;
    const auto rows = read_csv(path, kBoxHeader);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& f = rows[r];
        const std::string where = path.string() + " row " + std::to_string(r + 1);
        Box3D box;
        if (!f[1].empty()) box.object_id = static_cast<int>(to_double(f[1], where));
        box.cls = class_from_name(f[2]);
        box.center = Vec3(to_double(f[3], where), to_double(f[4], where), to_double(f[5], where));
        box.size = Vec3(to_double(f[6], where), to_double(f[7], where), to_double(f[8], where));
        box.yaw = to_double(f[9], where);
        if (!f[10].empty()) box.score = to_double(f[10], where);
        box.validate();
        frames[f[0]].push_back(box);
    }
    return frames;
}

// ---- commands -----------------------------------------------------------------

struct SimulateArgs {
    fs::path out;
    int count = 1;
    std::uint64_t seed = 0;
    ScenarioFlags scenario;
};

int cmd_simulate(const SimulateArgs& args, const CLI::App& sub) {
    if (args.count < 0) throw UsageError("--count must be >= 0");
    ensure_dir(args.out);
    Json manifest = echo_json(sub);
    manifest["sequences"] = Json::array();
    std::ostringstream boxes;
    boxes << echo_header(sub);
    for (std::size_t i = 0; i < kBoxHeader.size(); ++i) boxes << (i ? "," : "") << kBoxHeader[i];
    boxes << '\n';
    for (int n = 0; n < args.count; ++n) {
        const std::uint64_t seed = args.seed + static_cast<std::uint64_t>(n);
        const SequenceSample sample = generate_sequence(args.scenario.validated(seed));
        const std::string name = "seq_" + std::to_string(seed) + ".json";
        write_sequence(sample, args.out / name);
        write_boxes(boxes, seed, sample.keyframe_boxes);
        manifest["sequences"].push_back(Json{{"seed", seed}, {"file", name}});
    }
    if (args.count == 0) {
        args.scenario.validated(args.seed);
    }
    manifest["boxes"] = "gt_boxes.csv";
    write_text_file(args.out / "gt_boxes.csv", boxes.str());
    write_text_file(args.out / "manifest.json", manifest.dump(1) + "\n");
    std::cout << "wrote " << args.count << " sequence(s) to " << args.out.string() << '\n';
    return 0;
}

std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs, const std::string& manifest) {
    std::vector<fs::path> paths(inputs.begin(), inputs.end());
    if (!manifest.empty()) {
        const Json root = parse_json_text(read_text_file(manifest));
        const fs::path base = fs::path(manifest).parent_path();
        for (const Json& entry : require_field(root, "sequences", "manifest")) {
            paths.push_back(base / require_field(entry, "file", "manifest.sequences").get<std::string>());
        }
    }
    if (paths.empty()) throw UsageError("no input sequences (use --input or --manifest)");
    return paths;
}

struct AlignArgs {
    std::vector<std::string> inputs;
    std::string manifest;
    fs::path out;
    std::string mode = "oracle-fit";
    std::string grouping = "instance";
    PipelineConfig pipeline;
};

const char* kFlowHeader = "point,k,instance,label,x,y,z,pred_x,pred_y,pred_z,gt_x,gt_y,gt_z";

int cmd_align(AlignArgs args, const CLI::App& sub) {
    apply_pipeline_flags(args.mode, args.grouping, args.pipeline);
    const auto paths = collect_inputs(args.inputs, args.manifest);
    ensure_dir(args.out);
    Json report = echo_json(sub);
    report["sequences"] = Json::array();
    const std::string header = echo_header(sub);
    for (const fs::path& path : paths) {
        std::vector<std::string> warnings;
        const SequenceSample sample = read_sequence(path, &warnings);
        for (const std::string& w : warnings) std::cerr << path.string() << ": warning: " << w << '\n';
        const AlignmentResult result = run_alignment(sample, args.pipeline);
        const std::string stem = path.stem().string();
        const MergedCloud& m = result.merged;

        std::ostringstream flow;
        std::ostringstream cloud;
        flow << header << kFlowHeader << '\n';
        cloud << header << "x,y,z,k,instance,label\n";
        std::size_t dynamic = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const int label = static_cast<int>(m.labels[i]);
            dynamic += m.labels[i] == ClassLabel::DynamicFG ? 1 : 0;
            const Vec3& p = m.points[i];
            const Vec3& o = result.pred_flows[i];
            const Vec3& g = m.gt_flow[i];
            const Vec3& r = result.rectified[i];
            flow << i << ',' << m.timestamp[i] << ',' << m.instance[i] << ',' << label << ',' << num(p.x()) << ','
                 << num(p.y()) << ',' << num(p.z()) << ',' << num(o.x()) << ',' << num(o.y()) << ','
                 << num(o.z()) << ',' << num(g.x()) << ',' << num(g.y()) << ',' << num(g.z()) << '\n';
            cloud << num(r.x()) << ',' << num(r.y()) << ',' << num(r.z()) << ',' << m.timestamp[i] << ','
                  << m.instance[i] << ',' << label << '\n';
        }
        write_text_file(args.out / (stem + "_flow.csv"), flow.str());
        write_text_file(args.out / (stem + "_rectified.csv"), cloud.str());
        write_bev_grid(result.i0, args.out / (stem + "_i0.bev"));
        write_bev_grid(result.i1, args.out / (stem + "_i1.bev"));
        write_bev_grid(result.fused, args.out / (stem + "_fused.bev"));

        Json timings = Json::object();
        for (const StageTiming& t : result.timings) timings[t.stage] = t.seconds;
        report["sequences"].push_back(Json{{"input", path.string()},
                                           {"points", m.size()},
                                           {"dynamic_points", dynamic},
                                           {"groups", result.segmentation.groups.size()},
                                           {"fallback_groups", result.fallback_count()},
                                           {"unrectified_groups", result.unrectified_groups},
                                           {"timings", timings}});
        if (result.fallback_count() > 0 || !result.unrectified_groups.empty()) {
            std::cerr << path.string() << ": " << result.fallback_count() << " degenerate group(s), "
                      << result.unrectified_groups.size() << " group(s) without keyframe points\n";
        }
    }
    write_text_file(args.out / "align_report.json", report.dump(1) + "\n");
    std::cout << "aligned " << paths.size() << " sequence(s) into " << args.out.string() << '\n';
    return 0;
}

void emit(const std::string& prefix, const std::string& header, const std::string& csv, const std::string& text) {
    if (prefix.empty()) {
        std::cout << text;
        return;
    }
    write_text_file(prefix + ".csv", header + csv);
    write_text_file(prefix + ".txt", header + text);
    std::cout << text;
}

struct EvalFlowArgs {
    std::vector<std::string> inputs;
    std::string out;
    bool all_points = false;
};

int cmd_eval_flow(const EvalFlowArgs& args, const CLI::App& sub) {
    std::vector<Vec3> pred;
    std::vector<Vec3> gt;
    std::vector<bool> mask;
    const std::vector<std::string> header = split_csv_line(kFlowHeader);
    for (const std::string& input : args.inputs) {
        const auto rows = read_csv(input, header);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& f = rows[r];
            const std::string where = input + " row " + std::to_string(r + 1);
            pred.emplace_back(to_double(f[7], where), to_double(f[8], where), to_double(f[9], where));
            gt.emplace_back(to_double(f[10], where), to_double(f[11], where), to_double(f[12], where));
            mask.push_back(args.all_points || f[3] == "2");
        }
    }
    const FlowMetrics metrics = scene_flow_metrics(pred, gt, mask);
    emit(args.out, echo_header(sub), flow_metrics_csv(metrics), flow_metrics_text(metrics));
    return 0;
}

struct EvalDetArgs {
    std::string pred;
    std::string gt;
    std::string out;
    std::string mode = "both";
    std::string iou_type = "bev";
    std::vector<double> distances{0.5, 1.0, 2.0, 4.0};
    bool trim = false;
};

int cmd_eval_det(const EvalDetArgs& args, const CLI::App& sub) {
    const auto preds = read_boxes(args.pred);
    const auto gts = read_boxes(args.gt);
    std::vector<DetectionFrame> frames;
    for (const auto& [frame, boxes] : gts) {
        DetectionFrame f;
        f.gts = boxes;
        if (const auto it = preds.find(frame); it != preds.end()) f.preds = it->second;
        frames.push_back(std::move(f));
    }
    for (const auto& [frame, boxes] : preds) {
        if (!gts.contains(frame)) frames.push_back(DetectionFrame{boxes, {}});
    }
    DetectionConfig config;
    config.distance_thresholds = args.distances;
    config.iou_type = args.iou_type == "3d" ? IouType::ThreeD : IouType::Bev;
    config.ap.trim = args.trim;
    std::vector<MatchMode> modes;
    if (args.mode != "iou") modes.push_back(MatchMode::BevDistance);
    if (args.mode != "bev-distance") modes.push_back(MatchMode::Iou);
    std::string csv;
    std::string text;
    for (const MatchMode mode : modes) {
        config.mode = mode;
        const DetectionReport report = evaluate_detections(frames, config);
        std::string rows = detection_report_csv(report);
        if (!csv.empty()) rows.erase(0, rows.find('\n') + 1);  // one header only
        csv += rows;
        text += detection_report_text(report);
    }
    emit(args.out, echo_header(sub), csv, text);
    return 0;
}

struct ShadowArgs {
    std::string input;
    std::vector<double> speeds{2.0, 5.0, 10.0};
    double length = 4.5;
    std::uint64_t seed = 0;
    std::string out;
    std::string mode = "oracle-fit";
    std::string grouping = "instance";
    PipelineConfig pipeline;
};

int cmd_demo_shadow(ShadowArgs args, const CLI::App& sub) {
    apply_pipeline_flags(args.mode, args.grouping, args.pipeline);
    SequenceSample sample;
    if (!args.input.empty()) {
        sample = read_sequence(args.input);
    } else {
        ScenarioConfig config;
        config.seed = args.seed;
        for (std::size_t i = 0; i < args.speeds.size(); ++i) {
            ObjectSpec spec;
            spec.size.x() = args.length;
            spec.x = -10.0;
            spec.y = -12.0 + 8.0 * static_cast<double>(i);
            spec.speed = args.speeds[i];
            config.objects.push_back(spec);
        }
        try {
            config.validate();
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
        sample = generate_sequence(config);
    }
    const AlignmentResult result = run_alignment(sample, args.pipeline);
    std::ostringstream csv;
    csv << "object_id,class,speed,dynamic,true_length,emc_extent,rectified_extent\n";
    for (const ShadowMeasurement& row : measure_shadow(sample, result)) {
        csv << row.object_id << ',' << class_name(row.cls) << ',' << num(row.speed) << ','
            << (row.dynamic ? 1 : 0) << ',' << num(row.true_length) << ',' << num(row.emc_extent) << ','
            << num(row.rectified_extent) << '\n';
    }
    const std::string header = echo_header(sub);
    if (args.out.empty()) {
        std::cout << header << csv.str();
    } else {
        write_text_file(args.out, header + csv.str());
    }
    return 0;
}

struct BenchArgs {
    int points = 100000;
    int sweeps = 10;
    int objects = 10;
    int repeats = 10;
    int warmup = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string mode = "oracle-fit";
    std::string grouping = "instance";
    PipelineConfig pipeline;
};

int cmd_bench(BenchArgs args, const CLI::App& sub) {
    if (args.points < 1 || args.sweeps < 1 || args.objects < 0 || args.repeats < 1 || args.warmup < 0) {
        throw UsageError("bench: points, sweeps and repeats must be >= 1; objects and warmup >= 0");
    }
    apply_pipeline_flags(args.mode, args.grouping, args.pipeline);
    ScenarioConfig config;
    config.seed = args.seed;
    config.num_sweeps = args.sweeps;
    config.num_objects = args.objects;
    const int per_sweep = args.points / args.sweeps;
    config.points_per_object_per_sweep = args.objects > 0 ? (per_sweep * 3 / 10) / args.objects : 0;
    config.background_points_per_sweep = per_sweep - config.points_per_object_per_sweep * args.objects;
    try {
        config.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const SequenceSample sample = generate_sequence(config);
    std::size_t total_points = 0;
    for (const SweepRecord& s : sample.sweeps) total_points += s.points.size();

    for (int i = 0; i < args.warmup; ++i) run_alignment(sample, args.pipeline);
    std::vector<std::string> stages;
    std::map<std::string, std::vector<double>> samples;
    for (int r = 0; r < args.repeats; ++r) {
        const AlignmentResult result = run_alignment(sample, args.pipeline);
        double total = 0.0;
        for (const StageTiming& t : result.timings) {
            if (r == 0) stages.push_back(t.stage);
            samples[t.stage].push_back(t.seconds);
            total += t.seconds;
        }
        if (r == 0) stages.push_back("total");
        samples["total"].push_back(total);
    }
    auto stats = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
        return std::pair{median, v[std::max<std::size_t>(rank, 1) - 1]};
    };
    Json report = echo_json(sub);
    report["points"] = total_points;
    report["repeats"] = args.repeats;
    Json rows = Json::array();
    std::ostringstream text;
    text << "bench: " << total_points << " points, " << args.sweeps << " sweeps, " << args.repeats
         << " repeats\n";
    text << "stage,median_s,p95_s\n";
    for (const std::string& stage : stages) {
        const auto [median, p95] = stats(samples[stage]);
        rows.push_back(Json{{"stage", stage}, {"median_s", median}, {"p95_s", p95}});
        text << stage << ',' << num(median) << ',' << num(p95) << '\n';
    }
    report["stages"] = rows;
    std::cout << echo_header(sub) << text.str();
    if (!args.out.empty()) write_text_file(args.out, report.dump(1) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sweepalign: multi-sweep LiDAR accumulation, rectification and evaluation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "TOML/INI file with option values; command line flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Write simulated sequences, a manifest and gt boxes");
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_option("-n,--count", sim.count, "Number of sequences")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Seed of the first sequence")->capture_default_str();
    sim.scenario.add(simulate);

    AlignArgs align;
    CLI::App* align_cmd = app.add_subcommand("align", "Merge, label, rectify and rasterize sequences");
    align_cmd->add_option("-i,--input", align.inputs, "Sequence files");
    align_cmd->add_option("--manifest", align.manifest, "Manifest written by simulate");
    align_cmd->add_option("--out", align.out, "Output directory")->required();
    add_pipeline_flags(align_cmd, align.mode, align.grouping, align.pipeline);

    EvalFlowArgs flow;
    CLI::App* eval_flow = app.add_subcommand("eval-flow", "Scene flow metrics of align flow files");
    eval_flow->add_option("-i,--input", flow.inputs, "Flow CSV files written by align")->required();
    eval_flow->add_option("--out", flow.out, "Output prefix for <prefix>.csv and <prefix>.txt");
    eval_flow->add_flag("--all-points", flow.all_points, "Evaluate every point, not only dynamic ones");

    EvalDetArgs det;
    CLI::App* eval_det = app.add_subcommand("eval-det", "Detection AP of box files");
    eval_det->add_option("--pred", det.pred, "Predicted boxes CSV")->required();
    eval_det->add_option("--gt", det.gt, "Ground truth boxes CSV")->required();
    eval_det->add_option("--out", det.out, "Output prefix for <prefix>.csv and <prefix>.txt");
    eval_det->add_option("--mode", det.mode, "Matching criterion")
        ->check(CLI::IsMember({"bev-distance", "iou", "both"}))
        ->capture_default_str();
    eval_det->add_option("--iou-type", det.iou_type, "IoU variant")
        ->check(CLI::IsMember({"bev", "3d"}))
        ->capture_default_str();
    eval_det->add_option("--distance-thresholds", det.distances, "BEV center distance thresholds, m")
        ->capture_default_str();
    eval_det->add_flag("--trim", det.trim, "Drop recall below 0.1 and precision below 0.1");

    ShadowArgs shadow;
    CLI::App* demo = app.add_subcommand("demo-shadow", "Footprint extents before and after rectification");
    demo->add_option("-i,--input", shadow.input, "Sequence file; a synthetic scene when omitted");
    demo->add_option("--speeds", shadow.speeds, "Speeds of the synthetic objects, m/s")->capture_default_str();
    demo->add_option("--length", shadow.length, "Length of the synthetic objects, m")->capture_default_str();
    demo->add_option("--seed", shadow.seed, "Seed of the synthetic scene")->capture_default_str();
    demo->add_option("--out", shadow.out, "Output CSV (stdout when omitted)");
    add_pipeline_flags(demo, shadow.mode, shadow.grouping, shadow.pipeline);

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Per-stage timings of the align pipeline");
    bench_cmd->add_option("--points", bench.points, "Total points over all sweeps")->capture_default_str();
    bench_cmd->add_option("--sweeps", bench.sweeps, "Sweeps")->capture_default_str();
    bench_cmd->add_option("--objects", bench.objects, "Objects")->capture_default_str();
    bench_cmd->add_option("-r,--repeats", bench.repeats, "Timed runs")->capture_default_str();
    bench_cmd->add_option("--warmup", bench.warmup, "Untimed runs first")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Scene seed")->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "JSON report path");
    add_pipeline_flags(bench_cmd, bench.mode, bench.grouping, bench.pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, *simulate);
        if (align_cmd->parsed()) return cmd_align(align, *align_cmd);
        if (eval_flow->parsed()) return cmd_eval_flow(flow, *eval_flow);
        if (eval_det->parsed()) return cmd_eval_det(det, *eval_det);
        if (demo->parsed()) return cmd_demo_shadow(shadow, *demo);
        if (bench_cmd->parsed()) return cmd_bench(bench, *bench_cmd);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
