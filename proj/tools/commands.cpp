#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tanglekit/config.hpp"
#include "tanglekit/detect.hpp"
#include "tanglekit/evaluate.hpp"
#include "tanglekit/json_io.hpp"
#include "tanglekit/lap.hpp"
#include "tanglekit/parallel.hpp"
#include "tanglekit/rng.hpp"
#include "tanglekit/splines.hpp"
#include "tanglekit/synth.hpp"
#include "tanglekit/track.hpp"
#include "tanglekit/wormsim.hpp"

namespace {

using namespace tanglekit;
using nlohmann::json;

// Per-stage seed streams, all derived from the single master seed so each
// stage is independently reproducible.
constexpr std::uint64_t kStreamSimulate = 1;
constexpr std::uint64_t kStreamRender = 2;
constexpr std::uint64_t kStreamDetect = 3;
constexpr std::uint64_t kStreamBenchmark = 4;

RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return load_run_config(path);
}

void write_json_report(const json& doc, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error(path + ": write failure");
}

// Parses "HxW" geometry like "256x256" (height first, like the scene size).
void parse_size(const std::string& text, int& height, int& width) {
    const auto sep = text.find('x');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= text.size())
        throw std::invalid_argument("--size expects HxW, got \"" + text +
                                    "\"");
    try {
        std::size_t used_h = 0;
        std::size_t used_w = 0;
        const int h = std::stoi(text.substr(0, sep), &used_h);
        const int w = std::stoi(text.substr(sep + 1), &used_w);
        if (used_h != sep || used_w != text.size() - sep - 1)
            throw std::invalid_argument("trailing characters");
        height = h;
        width = w;
    } catch (const std::exception&) {
        throw std::invalid_argument("--size expects HxW, got \"" + text +
                                    "\"");
    }
}

// Reads a {"curves":[[[x,y],...],...]} document.
std::vector<std::vector<Vec2>> read_curves(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("curves") ||
        !doc.at("curves").is_array())
        throw std::runtime_error(path + ": expected {\"curves\": [...]}");
    std::vector<std::vector<Vec2>> curves;
    for (const json& cj : doc.at("curves")) {
        if (!cj.is_array())
            throw std::runtime_error(path + ": each curve must be an array");
        std::vector<Vec2> curve;
        for (const json& pj : cj) {
            if (!pj.is_array() || pj.size() != 2 || !pj[0].is_number() ||
                !pj[1].is_number())
                throw std::runtime_error(path +
                                         ": curve points must be [x,y]");
            curve.push_back({pj[0].get<double>(), pj[1].get<double>()});
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

std::vector<long long> parse_series(const std::string& text) {
    std::vector<long long> series;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            series.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument("--series expects comma-separated "
                                        "integers, got \"" +
                                        item + "\"");
        }
    }
    if (series.empty())
        throw std::invalid_argument("--series must not be empty");
    return series;
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string config_path;
    std::string out;
    std::string size_text;
    double density = 0.0;
    int frames = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    CLI::Option* density_opt = nullptr;
    CLI::Option* size_opt = nullptr;
    CLI::Option* frames_opt = nullptr;
    CLI::Option* dt_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

void run_simulate(const SimulateArgs& args) {
    RunConfig rc = load_config_or_default(args.config_path);
    if (args.seed_opt->count() > 0) rc.seed = args.seed;
    if (args.density_opt->count() > 0) rc.sim.density = args.density;
    if (args.size_opt->count() > 0)
        parse_size(args.size_text, rc.sim.height, rc.sim.width);
    if (args.frames_opt->count() > 0) rc.sim.n_frames = args.frames;
    if (args.dt_opt->count() > 0) rc.sim.dt = args.dt;
    rc.validate();

    const wormsim::Scene scene =
        wormsim::populate_scene(rc.sim, derive_seed(rc.seed, kStreamSimulate));

    double mean_overlaps = 0.0;
    if (!scene.worms.empty()) {
        for (std::size_t f = 0; f < scene.n_frames(); ++f)
            mean_overlaps +=
                wormsim::count_overlaps(scene, f, rc.render.max_radius);
        mean_overlaps /= static_cast<double>(scene.n_frames());
    }

    json_io::write_scene(scene, args.out);
    std::cout << "worms: " << scene.worms.size()
              << "  frames: " << scene.n_frames()
              << "  mean overlaps per worm: " << mean_overlaps << '\n';
}

// ---------------------------------------------------------------------------
// render

struct RenderArgs {
    std::string config_path;
    std::string scene_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
};

void run_render(const RenderArgs& args) {
    RunConfig rc = load_config_or_default(args.config_path);
    if (args.seed_opt->count() > 0) rc.seed = args.seed;
    rc.validate();

    const wormsim::Scene scene = json_io::read_scene(args.scene_path);
    const std::vector<synth::Frame> frames = synth::render_clip(
        scene, rc.render, rc.noise, derive_seed(rc.seed, kStreamRender));

    std::filesystem::create_directories(args.out_dir);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06zu.pgm", f);
        synth::write_pgm(frames[f],
                         (std::filesystem::path(args.out_dir) / name).string());
    }
    std::cout << "frames: " << frames.size() << "  -> " << args.out_dir
              << '\n';
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
    std::string config_path;
    std::string scene_path;
    std::string out;
    std::string mode = "oracle";
    double tau_s = 0.0;
    double tau_o = 0.0;
    std::uint64_t seed = 0;
    std::size_t pca_dim = 24;
    CLI::Option* tau_s_opt = nullptr;
    CLI::Option* tau_o_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

// Basis fitting input: a subsample of the scene's own shapes, closed under
// reversal. The stride keeps the covariance accumulation cheap on long
// dense clips without starving the fit.
PcaBasis fit_scene_basis(const wormsim::Scene& scene, std::size_t dim) {
    constexpr std::size_t kTargetSamples = 4000;
    std::size_t total = 0;
    for (const wormsim::WormTrack& worm : scene.worms)
        total += worm.states.size();
    const std::size_t stride = std::max<std::size_t>(1, total / kTargetSamples);

    std::vector<Spline> shapes;
    shapes.reserve(total / stride + 1);
    std::size_t index = 0;
    for (const wormsim::WormTrack& worm : scene.worms)
        for (const wormsim::WormState& state : worm.states)
            if (index++ % stride == 0) shapes.push_back(state.spline);
    std::vector<Spline> training = with_reversals(std::move(shapes));
    // Tiny scenes cannot support the full embedding dimension; shrink it to
    // what the sample count allows rather than refusing to run.
    const std::size_t usable = std::min(dim, training.size());
    return fit_pca(training, usable);
}

void run_detect(const DetectArgs& args) {
    RunConfig rc = load_config_or_default(args.config_path);
    if (args.seed_opt->count() > 0) rc.seed = args.seed;
    if (args.tau_s_opt->count() > 0) rc.thresholds.tau_s = args.tau_s;
    if (args.tau_o_opt->count() > 0) rc.thresholds.tau_o = args.tau_o;
    rc.validate();

    const wormsim::Scene scene = json_io::read_scene(args.scene_path);
    if (scene.n_frames() < 3)
        throw std::runtime_error(args.scene_path +
                                 ": detection needs at least 3 frames");

    const PcaBasis basis = fit_scene_basis(scene, args.pca_dim);
    const std::uint64_t stage_seed = derive_seed(rc.seed, kStreamDetect);

    const std::size_t n_interior = scene.n_frames() - 2;
    std::vector<json_io::FrameDetections> frames(n_interior);
    std::vector<std::size_t> raw_counts(n_interior, 0);
    parallel_for(n_interior, [&](std::size_t i) {
        const std::size_t f = i + 1;
        Rng rng(derive_seed(stage_seed, f));
        const std::vector<detect::Candidate> candidates = detect::oracle_detect(
            scene, f, rc.oracle, rc.thresholds, basis, rng);
        raw_counts[i] = candidates.size();
        frames[i].index = static_cast<int>(f);
        frames[i].accepted = detect::nms_filter(candidates, rc.thresholds);
    });

    std::size_t total_raw = 0;
    std::size_t total_accepted = 0;
    for (std::size_t i = 0; i < n_interior; ++i) {
        total_raw += raw_counts[i];
        total_accepted += frames[i].accepted.size();
    }

    json_io::write_detections(frames, args.out);
    std::cout << "frames: " << n_interior << "  candidates: " << total_raw
              << "  accepted: " << total_accepted << '\n';
}

// ---------------------------------------------------------------------------
// track

struct TrackArgs {
    std::string config_path;
    std::string detections_path;
    std::string out;
    std::string cost_mode;
    CLI::Option* cost_mode_opt = nullptr;
};

void run_track(const TrackArgs& args) {
    RunConfig rc = load_config_or_default(args.config_path);
    if (args.cost_mode_opt->count() > 0)
        rc.link.cost_mode = args.cost_mode == "present"
                                ? track::LinkConfig::CostMode::present
                                : track::LinkConfig::CostMode::directed;
    rc.validate();

    std::vector<json_io::FrameDetections> file_frames =
        json_io::read_detections(args.detections_path);
    std::sort(file_frames.begin(), file_frames.end(),
              [](const json_io::FrameDetections& a,
                 const json_io::FrameDetections& b) {
                  return a.index < b.index;
              });

    std::vector<std::vector<track::Detection>> frames;
    frames.reserve(file_frames.size());
    for (const json_io::FrameDetections& frame : file_frames) {
        std::vector<track::Detection> dets;
        dets.reserve(frame.accepted.size());
        for (const detect::Candidate& c : frame.accepted)
            dets.push_back({frame.index, c.triplet, -1});
        frames.push_back(std::move(dets));
    }

    std::vector<track::Track> tracks =
        track::fix_stubs(track::build_tracks(std::move(frames), rc.link),
                         rc.link);

    double mean_length = 0.0;
    for (const track::Track& t : tracks)
        mean_length += static_cast<double>(t.length());
    if (!tracks.empty()) mean_length /= static_cast<double>(tracks.size());

    json_io::write_tracks(tracks, args.out);
    std::cout << "tracks: " << tracks.size()
              << "  mean length: " << mean_length << '\n';
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string config_path;
    std::string labels_path;
    std::string predictions_path;
    std::string scene_path;
    std::string tracks_path;
    std::string series_text;
    std::string out;
};

void run_evaluate_adtw(const EvaluateArgs& args) {
    const auto label_curves = read_curves(args.labels_path);
    const auto pred_curves = read_curves(args.predictions_path);
    if (label_curves.size() != pred_curves.size())
        throw std::runtime_error("curve count mismatch: " +
                                 std::to_string(label_curves.size()) +
                                 " labels vs " +
                                 std::to_string(pred_curves.size()) +
                                 " predictions");

    std::vector<double> deltas;
    deltas.reserve(label_curves.size());
    for (std::size_t i = 0; i < label_curves.size(); ++i)
        deltas.push_back(evaluate::adtw(evaluate::LabeledCurve{label_curves[i]},
                                        Spline{pred_curves[i]}));

    std::cout << "pairs: " << deltas.size()
              << "  mean adtw: " << mean_of(deltas) << '\n';
    write_json_report({{"adtw", deltas}, {"mean_adtw", mean_of(deltas)}},
                      args.out);
}

void run_evaluate_tpfn(const EvaluateArgs& args) {
    RunConfig rc = load_config_or_default(args.config_path);
    rc.validate();

    const auto label_curves = read_curves(args.labels_path);
    const auto pred_curves = read_curves(args.predictions_path);
    std::vector<evaluate::LabeledCurve> labels;
    for (const auto& c : label_curves) labels.push_back({c});
    std::vector<Spline> predictions;
    for (const auto& c : pred_curves) predictions.push_back({c});

    const evaluate::EvalReport report =
        evaluate::match_tp_fn(labels, predictions, rc.eval);
    std::cout << "tp rate: " << report.tp_rate
              << "  fn rate: " << report.fn_rate
              << "  matched: " << report.n_matched << '\n';
    write_json_report({{"tp_rate", report.tp_rate},
                       {"fn_rate", report.fn_rate},
                       {"n_labels", report.n_labels},
                       {"n_predictions", report.n_predictions},
                       {"n_matched", report.n_matched},
                       {"adtw", report.adtw_values},
                       {"mean_adtw", mean_of(report.adtw_values)}},
                      args.out);
}

void run_evaluate_integrity(const EvaluateArgs& args) {
    const bool have_series = !args.series_text.empty();
    const bool have_scene =
        !args.scene_path.empty() || !args.tracks_path.empty();
    if (have_series == have_scene)
        throw std::invalid_argument(
            "integrity needs either --series or --scene with --tracks");

    if (have_series) {
        const double iota =
            evaluate::tracking_integrity(parse_series(args.series_text));
        std::cout << "integrity: " << iota << '\n';
        write_json_report({{"integrity", iota}}, args.out);
        return;
    }

    if (args.scene_path.empty() || args.tracks_path.empty())
        throw std::invalid_argument(
            "integrity needs both --scene and --tracks");
    RunConfig rc = load_config_or_default(args.config_path);
    rc.validate();
    const wormsim::Scene scene = json_io::read_scene(args.scene_path);
    const std::vector<track::Track> tracks =
        json_io::read_tracks(args.tracks_path);
    const evaluate::IntegrityReport report =
        evaluate::scene_integrity(scene, tracks, rc.eval);
    std::cout << "integrity: " << report.mean << "  (worms: "
              << report.per_worm.size() << ")\n";
    write_json_report(
        {{"integrity", report.mean}, {"per_worm", report.per_worm}}, args.out);
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkArgs {
    std::string target;
    long long n = -1;  // -1: per-target default
    int repeat = 5;
    std::uint64_t seed = 1;
    std::string out;
};

struct BenchmarkResult {
    std::vector<double> times_ms;  // one per repeat (per operation)
    std::size_t items = 0;         // problem size actually used
};

double time_ms(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

BenchmarkResult bench_nms(std::size_t n, int repeat, Rng& rng) {
    detect::Thresholds thresholds;
    // Spread candidates so the occupancy per suppression cell stays
    // realistic as n grows; tie latents loosely to position so both
    // suppression outcomes occur.
    const double side =
        std::max(1.0, thresholds.sigma_l * std::sqrt(static_cast<double>(n) /
                                                     4.0));
    std::vector<detect::Candidate> candidates(n);
    for (detect::Candidate& c : candidates) {
        const Vec2 x0{rng.uniform(0.0, side), rng.uniform(0.0, side)};
        c.descriptors[1].offset = x0;
        c.score = rng.uniform();
        c.latent.resize(8);
        c.latent[0] = x0.x / thresholds.sigma_l;
        c.latent[1] = x0.y / thresholds.sigma_l;
        for (std::size_t d = 2; d < 8; ++d)
            c.latent[d] = rng.normal(0.0, 0.2);
    }
    BenchmarkResult result;
    result.items = n;
    detect::nms_filter(candidates, thresholds);  // warm-up
    for (int r = 0; r < repeat; ++r)
        result.times_ms.push_back(time_ms(
            [&] { volatile auto kept = detect::nms_filter(candidates,
                                                          thresholds)
                                           .size();
                  (void)kept; }));
    return result;
}

BenchmarkResult bench_lap(std::size_t n, int repeat, Rng& rng) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(n * n, kInf);
    for (std::size_t i = 0; i < n; ++i) {
        cost[i * n + i] = rng.uniform(50.0, 150.0);
        for (int e = 0; e < 12; ++e) {
            const std::size_t j = rng.uniform_index(n);
            cost[i * n + j] = rng.uniform(1.0, 100.0);
        }
    }
    BenchmarkResult result;
    result.items = n;
    if (n > 0) lap::solve_square(cost, n);  // warm-up
    for (int r = 0; r < repeat; ++r)
        result.times_ms.push_back(time_ms([&] {
            if (n > 0) {
                volatile int first = lap::solve_square(cost, n)[0];
                (void)first;
            }
        }));
    return result;
}

BenchmarkResult bench_render(std::size_t n, int repeat, Rng& rng) {
    const wormsim::SimConfig sim;
    const synth::RenderConfig render;
    constexpr int kSide = 512;
    std::vector<Spline> splines;
    splines.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
        wormsim::WormParams params = wormsim::sample_params(rng, sim);
        Spline shape = wormsim::body_coordinates(
            params, rng.uniform(0.0, params.T),
            rng.uniform(0.0, 2.0 * std::numbers::pi), sim.k);
        const Vec2 centre = wormsim::arc_centroid(shape);
        const Vec2 target{rng.uniform(0.0, kSide), rng.uniform(0.0, kSide)};
        for (Vec2& p : shape.points) {
            p.x += target.x - centre.x;
            p.y += target.y - centre.y;
        }
        splines.push_back(std::move(shape));
    }
    BenchmarkResult result;
    result.items = n;
    synth::rasterize(splines, render, kSide, kSide);  // warm-up
    for (int r = 0; r < repeat; ++r)
        result.times_ms.push_back(time_ms([&] {
            volatile float probe =
                synth::rasterize(splines, render, kSide, kSide).pixels[0];
            (void)probe;
        }));
    return result;
}

BenchmarkResult bench_adtw(std::size_t n, int repeat, Rng& rng) {
    const wormsim::SimConfig sim;
    const wormsim::WormParams params = wormsim::sample_params(rng, sim);
    const Spline base = wormsim::body_coordinates(params, 0.3, 0.2, sim.k);
    Spline prediction = base;
    evaluate::LabeledCurve label;
    label.points = resample_equidistant(base.points, std::max<std::size_t>(
                                                         2, n)).points;
    for (Vec2& p : label.points) {
        p.x += rng.normal(0.0, 0.5);
        p.y += rng.normal(0.0, 0.5);
    }

    constexpr int kCallsPerRepeat = 2000;
    BenchmarkResult result;
    result.items = label.points.size();
    evaluate::adtw(label, prediction);  // warm-up
    for (int r = 0; r < repeat; ++r) {
        const double batch = time_ms([&] {
            double acc = 0.0;
            for (int c = 0; c < kCallsPerRepeat; ++c)
                acc += evaluate::adtw(label, prediction);
            volatile double sink = acc;
            (void)sink;
        });
        result.times_ms.push_back(batch / kCallsPerRepeat);
    }
    return result;
}

void run_benchmark(const BenchmarkArgs& args) {
    if (args.repeat < 1)
        throw std::invalid_argument("--repeat must be at least 1");
    std::size_t n = 0;
    if (args.n >= 0) {
        n = static_cast<std::size_t>(args.n);
    } else if (args.target == "nms") {
        n = 10000;
    } else if (args.target == "lap") {
        n = 500;
    } else if (args.target == "render") {
        n = 200;
    } else {
        n = 20;  // adtw label points
    }

    Rng rng(derive_seed(args.seed, kStreamBenchmark));
    BenchmarkResult result;
    if (args.target == "nms") {
        result = bench_nms(n, args.repeat, rng);
    } else if (args.target == "lap") {
        result = bench_lap(n, args.repeat, rng);
    } else if (args.target == "render") {
        result = bench_render(n, args.repeat, rng);
    } else {
        result = bench_adtw(n, args.repeat, rng);
    }

    std::vector<double> sorted = result.times_ms;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double lo = sorted.front();
    const double hi = sorted.back();
    const double ops_per_s = median > 0.0 ? 1000.0 / median : 0.0;

    std::cout << "benchmark " << args.target << ": n=" << result.items
              << "  median " << median << " ms/op  (min " << lo << ", max "
              << hi << ")  " << ops_per_s << " ops/s\n";
    write_json_report({{"target", args.target},
                       {"n", result.items},
                       {"repeat", args.repeat},
                       {"times_ms", result.times_ms},
                       {"median_ms", median},
                       {"min_ms", lo},
                       {"max_ms", hi},
                       {"ops_per_s", ops_per_s}},
                      args.out);
}

}  // namespace

int tanglekit_cli_main(int argc, char** argv) {
    CLI::App app{"Spline-space detection and tracking of crawling worms"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand(
        "simulate", "Synthesize a scene of crawling worms");
    sim->add_option("--config", sim_args.config_path, "Run-config JSON file");
    sim_args.density_opt =
        sim->add_option("--density", sim_args.density, "Worms per mm^2");
    sim_args.size_opt =
        sim->add_option("--size", sim_args.size_text, "Frame size as HxW");
    sim_args.frames_opt =
        sim->add_option("--frames", sim_args.frames, "Number of frames");
    sim_args.dt_opt = sim->add_option("--dt", sim_args.dt,
                                      "Frame interval in seconds");
    sim_args.seed_opt =
        sim->add_option("--seed", sim_args.seed, "Master seed");
    sim->add_option("--out", sim_args.out, "Output scene JSON path")
        ->required();
    sim->callback([&] { run_simulate(sim_args); });

    RenderArgs render_args;
    CLI::App* render =
        app.add_subcommand("render", "Render a scene to PGM frames");
    render->add_option("--config", render_args.config_path,
                       "Run-config JSON file");
    render->add_option("--scene", render_args.scene_path, "Scene JSON path")
        ->required();
    render->add_option("--out", render_args.out_dir, "Output directory")
        ->required();
    render_args.seed_opt =
        render->add_option("--seed", render_args.seed, "Master seed");
    render->callback([&] { run_render(render_args); });

    DetectArgs detect_args;
    CLI::App* det = app.add_subcommand(
        "detect", "Produce per-frame accepted candidates for a scene");
    det->add_option("--config", detect_args.config_path,
                    "Run-config JSON file");
    det->add_option("--scene", detect_args.scene_path, "Scene JSON path")
        ->required();
    det->add_option("--mode", detect_args.mode, "Detector backend")
        ->check(CLI::IsMember({"oracle"}));
    detect_args.tau_s_opt = det->add_option("--tau-s", detect_args.tau_s,
                                            "Score acceptance threshold");
    detect_args.tau_o_opt = det->add_option(
        "--tau-o", detect_args.tau_o, "Same-object suppression threshold");
    det->add_option("--pca-dim", detect_args.pca_dim,
                    "Shape basis dimensionality");
    detect_args.seed_opt =
        det->add_option("--seed", detect_args.seed, "Master seed");
    det->add_option("--out", detect_args.out, "Output detections JSON path")
        ->required();
    det->callback([&] { run_detect(detect_args); });

    TrackArgs track_args;
    CLI::App* trk =
        app.add_subcommand("track", "Link detections into tracks");
    trk->add_option("--config", track_args.config_path,
                    "Run-config JSON file");
    trk->add_option("--detections", track_args.detections_path,
                    "Detections JSON path")
        ->required();
    track_args.cost_mode_opt =
        trk->add_option("--cost-mode", track_args.cost_mode,
                        "Linking cost: directed or present")
            ->check(CLI::IsMember({"directed", "present"}));
    trk->add_option("--out", track_args.out, "Output tracks JSON path")
        ->required();
    trk->callback([&] { run_track(track_args); });

    EvaluateArgs eval_args;
    CLI::App* eval =
        app.add_subcommand("evaluate", "Compute evaluation metrics");
    eval->require_subcommand(1);

    CLI::App* eval_adtw = eval->add_subcommand(
        "adtw", "Per-pair asymmetric DTW distances (index-aligned)");
    eval_adtw->add_option("--labels", eval_args.labels_path,
                          "Label curves JSON")
        ->required();
    eval_adtw->add_option("--predictions", eval_args.predictions_path,
                          "Predicted curves JSON")
        ->required();
    eval_adtw->add_option("--out", eval_args.out, "Report JSON path");
    eval_adtw->callback([&] { run_evaluate_adtw(eval_args); });

    CLI::App* eval_tpfn = eval->add_subcommand(
        "tpfn", "Matched TP/FN rates between labels and predictions");
    eval_tpfn->add_option("--config", eval_args.config_path,
                          "Run-config JSON file");
    eval_tpfn->add_option("--labels", eval_args.labels_path,
                          "Label curves JSON")
        ->required();
    eval_tpfn->add_option("--predictions", eval_args.predictions_path,
                          "Predicted curves JSON")
        ->required();
    eval_tpfn->add_option("--out", eval_args.out, "Report JSON path");
    eval_tpfn->callback([&] { run_evaluate_tpfn(eval_args); });

    CLI::App* eval_int = eval->add_subcommand(
        "integrity", "Tracking integrity of a series or a tracked scene");
    eval_int->add_option("--config", eval_args.config_path,
                         "Run-config JSON file");
    eval_int->add_option("--series", eval_args.series_text,
                         "Comma-separated identity series");
    eval_int->add_option("--scene", eval_args.scene_path, "Scene JSON path");
    eval_int->add_option("--tracks", eval_args.tracks_path,
                         "Tracks JSON path");
    eval_int->add_option("--out", eval_args.out, "Report JSON path");
    eval_int->callback([&] { run_evaluate_integrity(eval_args); });

    BenchmarkArgs bench_args;
    CLI::App* bench =
        app.add_subcommand("benchmark", "Time one pipeline hot spot");
    bench->add_option("target", bench_args.target, "What to time")
        ->required()
        ->check(CLI::IsMember({"nms", "lap", "render", "adtw"}));
    bench->add_option("--n", bench_args.n, "Problem size");
    bench->add_option("--repeat", bench_args.repeat, "Timed repetitions");
    bench->add_option("--seed", bench_args.seed, "Master seed");
    bench->add_option("--out", bench_args.out, "Report JSON path");
    bench->callback([&] { run_benchmark(bench_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
