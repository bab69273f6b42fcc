#include "tanglekit/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace tanglekit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
    throw std::invalid_argument("config: " + message);
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path + " must be a JSON object");
}

// Rejects any key of `j` that is not in `allowed`.
void reject_unknown_keys(const json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) fail("unknown key \"" + item.key() + "\" in " + path);
    }
}

std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
}

void read_double(const json& j, const std::string& path, const char* key,
                 double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number()) fail(join(path, key) + " must be a number");
    out = v.get<double>();
}

void read_int(const json& j, const std::string& path, const char* key,
              int& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(join(path, key) + " must be an integer");
    out = v.get<int>();
}

void read_size(const json& j, const std::string& path, const char* key,
               std::size_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        fail(join(path, key) + " must be a non-negative integer");
    out = static_cast<std::size_t>(v.get<std::int64_t>());
}

void read_u64(const json& j, const std::string& path, const char* key,
              std::uint64_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number_unsigned()) {
        out = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        out = static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else {
        fail(join(path, key) + " must be a non-negative integer");
    }
}

void read_range(const json& j, const std::string& path, const char* key,
                wormsim::Range& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number())
        fail(join(path, key) + " must be a [min, max] pair of numbers");
    out.min = v[0].get<double>();
    out.max = v[1].get<double>();
}

void parse_sim(const json& j, wormsim::SimConfig& sim) {
    require_object(j, "sim");
    reject_unknown_keys(j, "sim",
                        {"L", "A", "T", "k_u", "k_s", "alpha", "alpha_t",
                         "height", "width", "n_frames", "dt", "density",
                         "mm_per_px", "k"});
    read_range(j, "sim", "L", sim.L);
    read_range(j, "sim", "A", sim.A);
    read_range(j, "sim", "T", sim.T);
    read_range(j, "sim", "k_u", sim.k_u);
    read_range(j, "sim", "k_s", sim.k_s);
    read_range(j, "sim", "alpha", sim.alpha);
    read_double(j, "sim", "alpha_t", sim.alpha_t);
    read_int(j, "sim", "height", sim.height);
    read_int(j, "sim", "width", sim.width);
    read_int(j, "sim", "n_frames", sim.n_frames);
    read_double(j, "sim", "dt", sim.dt);
    read_double(j, "sim", "density", sim.density);
    read_double(j, "sim", "mm_per_px", sim.mm_per_px);
    read_size(j, "sim", "k", sim.k);
}

void parse_render(const json& j, synth::RenderConfig& render) {
    require_object(j, "render");
    reject_unknown_keys(j, "render",
                        {"max_radius", "a", "b", "body_intensity",
                         "background_intensity"});
    read_double(j, "render", "max_radius", render.max_radius);
    read_double(j, "render", "a", render.a);
    read_double(j, "render", "b", render.b);
    read_double(j, "render", "body_intensity", render.body_intensity);
    read_double(j, "render", "background_intensity",
                render.background_intensity);
}

void parse_noise(const json& j, synth::NoiseConfig& noise) {
    require_object(j, "noise");
    reject_unknown_keys(j, "noise",
                        {"background_amplitude", "vignette_strength",
                         "blur_sigma", "noise_sigma"});
    read_double(j, "noise", "background_amplitude",
                noise.background_amplitude);
    read_double(j, "noise", "vignette_strength", noise.vignette_strength);
    read_double(j, "noise", "blur_sigma", noise.blur_sigma);
    read_double(j, "noise", "noise_sigma", noise.noise_sigma);
}

void parse_oracle(const json& j, detect::OracleDetectorConfig& oracle) {
    require_object(j, "oracle");
    reject_unknown_keys(
        j, "oracle",
        {"candidates_per_worm", "sigma_pert", "score_noise", "latent_spread",
         "quality_spread", "miss_probability", "spurious_rate",
         "latent_map_seed", "latent_dim", "latent_scale"});
    read_int(j, "oracle", "candidates_per_worm", oracle.candidates_per_worm);
    read_double(j, "oracle", "sigma_pert", oracle.sigma_pert);
    read_double(j, "oracle", "score_noise", oracle.score_noise);
    read_double(j, "oracle", "latent_spread", oracle.latent_spread);
    read_double(j, "oracle", "quality_spread", oracle.quality_spread);
    read_double(j, "oracle", "miss_probability", oracle.miss_probability);
    read_double(j, "oracle", "spurious_rate", oracle.spurious_rate);
    read_u64(j, "oracle", "latent_map_seed", oracle.latent_map_seed);
    read_size(j, "oracle", "latent_dim", oracle.latent_dim);
    read_double(j, "oracle", "latent_scale", oracle.latent_scale);
}

void parse_thresholds(const json& j, detect::Thresholds& thresholds) {
    require_object(j, "thresholds");
    reject_unknown_keys(j, "thresholds",
                        {"tau_s", "tau_o", "sigma_l", "sigma_s"});
    read_double(j, "thresholds", "tau_s", thresholds.tau_s);
    read_double(j, "thresholds", "tau_o", thresholds.tau_o);
    read_double(j, "thresholds", "sigma_l", thresholds.sigma_l);
    read_double(j, "thresholds", "sigma_s", thresholds.sigma_s);
}

void parse_link(const json& j, track::LinkConfig& link) {
    require_object(j, "link");
    reject_unknown_keys(j, "link",
                        {"gate_radius", "birth_death_cost",
                         "min_track_length", "cost_mode"});
    read_double(j, "link", "gate_radius", link.gate_radius);
    read_double(j, "link", "birth_death_cost", link.birth_death_cost);
    read_int(j, "link", "min_track_length", link.min_track_length);
    if (j.contains("cost_mode")) {
        const json& v = j.at("cost_mode");
        if (!v.is_string()) fail("link.cost_mode must be a string");
        const std::string mode = v.get<std::string>();
        if (mode == "directed") {
            link.cost_mode = track::LinkConfig::CostMode::directed;
        } else if (mode == "present") {
            link.cost_mode = track::LinkConfig::CostMode::present;
        } else {
            fail("link.cost_mode must be \"directed\" or \"present\"");
        }
    }
}

void parse_eval(const json& j, evaluate::EvalConfig& eval) {
    require_object(j, "eval");
    reject_unknown_keys(j, "eval", {"sigma_eps"});
    read_double(j, "eval", "sigma_eps", eval.sigma_eps);
}

}  // namespace

void RunConfig::validate() const {
    sim.validate();
    render.validate();
    noise.validate();
    oracle.validate();
    thresholds.validate();
    link.validate();
    eval.validate();
}

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }
    require_object(j, "document root");
    reject_unknown_keys(j, "document root",
                        {"seed", "sim", "render", "noise", "oracle",
                         "thresholds", "link", "eval", "mm_per_px"});

    RunConfig config;
    read_u64(j, "", "seed", config.seed);
    if (j.contains("sim")) parse_sim(j.at("sim"), config.sim);
    if (j.contains("render")) parse_render(j.at("render"), config.render);
    if (j.contains("noise")) parse_noise(j.at("noise"), config.noise);
    if (j.contains("oracle")) parse_oracle(j.at("oracle"), config.oracle);
    if (j.contains("thresholds"))
        parse_thresholds(j.at("thresholds"), config.thresholds);
    if (j.contains("link")) parse_link(j.at("link"), config.link);
    if (j.contains("eval")) parse_eval(j.at("eval"), config.eval);
    // Top-level pixel scale is a convenience alias for sim.mm_per_px; the
    // last setting in document order would be ambiguous, so the alias wins
    // only when present.
    read_double(j, "", "mm_per_px", config.sim.mm_per_px);

    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw std::runtime_error("config: failed reading " + path);
    return parse_run_config(buffer.str());
}

std::string dump_run_config(const RunConfig& config) {
    json sim = {
        {"L", {config.sim.L.min, config.sim.L.max}},
        {"A", {config.sim.A.min, config.sim.A.max}},
        {"T", {config.sim.T.min, config.sim.T.max}},
        {"k_u", {config.sim.k_u.min, config.sim.k_u.max}},
        {"k_s", {config.sim.k_s.min, config.sim.k_s.max}},
        {"alpha", {config.sim.alpha.min, config.sim.alpha.max}},
        {"alpha_t", config.sim.alpha_t},
        {"height", config.sim.height},
        {"width", config.sim.width},
        {"n_frames", config.sim.n_frames},
        {"dt", config.sim.dt},
        {"density", config.sim.density},
        {"mm_per_px", config.sim.mm_per_px},
        {"k", config.sim.k},
    };
    json render = {
        {"max_radius", config.render.max_radius},
        {"a", config.render.a},
        {"b", config.render.b},
        {"body_intensity", config.render.body_intensity},
        {"background_intensity", config.render.background_intensity},
    };
    json noise = {
        {"background_amplitude", config.noise.background_amplitude},
        {"vignette_strength", config.noise.vignette_strength},
        {"blur_sigma", config.noise.blur_sigma},
        {"noise_sigma", config.noise.noise_sigma},
    };
    json oracle = {
        {"candidates_per_worm", config.oracle.candidates_per_worm},
        {"sigma_pert", config.oracle.sigma_pert},
        {"score_noise", config.oracle.score_noise},
        {"latent_spread", config.oracle.latent_spread},
        {"quality_spread", config.oracle.quality_spread},
        {"miss_probability", config.oracle.miss_probability},
        {"spurious_rate", config.oracle.spurious_rate},
        {"latent_map_seed", config.oracle.latent_map_seed},
        {"latent_dim", config.oracle.latent_dim},
        {"latent_scale", config.oracle.latent_scale},
    };
    json thresholds = {
        {"tau_s", config.thresholds.tau_s},
        {"tau_o", config.thresholds.tau_o},
        {"sigma_l", config.thresholds.sigma_l},
        {"sigma_s", config.thresholds.sigma_s},
    };
    json link = {
        {"gate_radius", config.link.gate_radius},
        {"birth_death_cost", config.link.birth_death_cost},
        {"min_track_length", config.link.min_track_length},
        {"cost_mode", config.link.cost_mode ==
                              track::LinkConfig::CostMode::directed
                          ? "directed"
                          : "present"},
    };
    json eval = {{"sigma_eps", config.eval.sigma_eps}};

    json doc = {
        {"seed", config.seed},     {"sim", sim},
        {"render", render},        {"noise", noise},
        {"oracle", oracle},        {"thresholds", thresholds},
        {"link", link},            {"eval", eval},
    };
    return doc.dump(2) + "\n";
}

}  // namespace tanglekit
