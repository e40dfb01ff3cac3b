// Copyright 2026 The collisional-tur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Experiment configuration: JSON document -> validated ExperimentConfig.
// Every validation failure names the offending field path.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctur/markov.hpp"
#include "ctur/model.hpp"

namespace ctur::cli {

/// Raised for malformed or invalid configuration (exit status 1).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg) : std::runtime_error(path + ": " + msg) {}
};

enum class Mode { MarkovNess, MarkovFt, Qtur, Nm1, Nm2, Blp };
enum class Scale { Linear, Log };
enum class OutputFormat { Csv, Json };
enum class BlpDynamics { Nm1, Nm2, Markov };

inline constexpr std::array<std::pair<const char*, Mode>, 6> kModeNames{{{"markov_ness", Mode::MarkovNess},
                                                                          {"markov_ft", Mode::MarkovFt},
                                                                          {"qtur", Mode::Qtur},
                                                                          {"nm1", Mode::Nm1},
                                                                          {"nm2", Mode::Nm2},
                                                                          {"blp", Mode::Blp}}};

inline constexpr std::array<std::pair<const char*, double ModelParams::*>, 10> kParamFields{{
    {"omega_s", &ModelParams::omega_s},
    {"omega_a", &ModelParams::omega_a},
    {"omega", &ModelParams::omega},
    {"nu", &ModelParams::nu},
    {"g1", &ModelParams::g1},
    {"g2", &ModelParams::g2},
    {"temp_s", &ModelParams::temp_s},
    {"temp_a", &ModelParams::temp_a},
    {"tau", &ModelParams::tau},
    {"epsilon", &ModelParams::epsilon},
}};

inline double ModelParams::* param_field(const std::string& name) {
    for (const auto& [key, field] : kParamFields) {
        if (name == key) return field;
    }
    return nullptr;
}

struct SweepAxis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int points = 1;
    Scale scale = Scale::Linear;

    double value(int i) const {
        if (points == 1) return min;
        const double f = static_cast<double>(i) / (points - 1);
        if (scale == Scale::Log) return std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
        return min + f * (max - min);
    }
};

struct BlpOptions {
    BlpDynamics dynamics = BlpDynamics::Nm1;
    int grid_points = 64;
    double markov_dt = 0.01;
};

struct ExperimentConfig {
    Mode mode = Mode::MarkovNess;
    ModelParams params;
    std::vector<SweepAxis> sweep;
    std::vector<double> times;
    double chi_step = 0.0; // 0 selects the default stencil step
    int substeps = 20;
    EntropyVariant entropy = EntropyVariant::RateTimesT;
    long max_collisions = 2'000'000;
    BlpOptions blp;
    std::filesystem::path output = "results.csv";
    OutputFormat format = OutputFormat::Csv;
    int threads = 0; // 0 selects the hardware concurrency
};

inline const char* to_string(Mode m) {
    for (const auto& [key, mode] : kModeNames) {
        if (mode == m) return key;
    }
    return "?";
}

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
    return d;
}

inline long integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<long>();
}

inline std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

template <class E, std::size_t N>
E choice(const json& v, const std::string& path, const std::array<std::pair<const char*, E>, N>& options) {
    const auto s = text(v, path);
    for (const auto& [key, value] : options) {
        if (s == key) return value;
    }
    std::string names;
    for (const auto& [key, _] : options) names += (names.empty() ? "" : ", ") + std::string(key);
    throw ConfigError(path, "unknown value '" + s + "' (expected one of " + names + ")");
}

inline SweepAxis parse_axis(const json& j, const std::string& path) {
    check_keys(j, path, {"name", "min", "max", "points", "scale"});
    for (const char* req : {"name", "min", "max", "points"}) {
        if (!j.contains(req)) throw ConfigError(path + "." + req, "missing");
    }
    SweepAxis a;
    a.name = text(j["name"], path + ".name");
    if (!param_field(a.name)) throw ConfigError(path + ".name", "unknown model parameter '" + a.name + "'");
    a.min = number(j["min"], path + ".min");
    a.max = number(j["max"], path + ".max");
    const long pts = integer(j["points"], path + ".points");
    if (pts < 1 || pts > 1'000'000) throw ConfigError(path + ".points", "must lie in [1, 1000000]");
    a.points = static_cast<int>(pts);
    if (j.contains("scale")) {
        a.scale = choice(j["scale"], path + ".scale",
                         std::array<std::pair<const char*, Scale>, 2>{{{"linear", Scale::Linear}, {"log", Scale::Log}}});
    }
    if (a.scale == Scale::Log && (a.min <= 0.0 || a.max <= 0.0)) {
        throw ConfigError(path, "log scale needs positive bounds");
    }
    return a;
}

} // namespace detail

/// Parse and validate a configuration document. Relative output paths are
/// kept as written (resolved against the working directory at run time).
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::integer;
    using detail::number;
    detail::check_keys(j, "", {"mode", "params", "sweep", "times", "chi_step", "substeps", "entropy",
                               "max_collisions", "blp", "output", "threads", "description"});
    ExperimentConfig c;
    if (!j.contains("mode")) throw ConfigError("mode", "missing");
    c.mode = detail::choice(j["mode"], "mode", kModeNames);

    if (j.contains("params")) {
        const auto& pj = j["params"];
        if (!pj.is_object()) throw ConfigError("params", "expected an object");
        for (const auto& [key, value] : pj.items()) {
            const auto field = param_field(key);
            if (!field) throw ConfigError("params." + key, "unknown model parameter");
            c.params.*field = number(value, "params." + key);
        }
    }
    try {
        c.params.validate();
    } catch (const Error& e) {
        throw ConfigError("params", e.what());
    }

    if (j.contains("sweep")) {
        const auto& sj = j["sweep"];
        if (!sj.is_array()) throw ConfigError("sweep", "expected an array of axes");
        if (sj.size() > 2) throw ConfigError("sweep", "at most two axes are supported");
        for (std::size_t i = 0; i < sj.size(); ++i) {
            c.sweep.push_back(detail::parse_axis(sj[i], "sweep[" + std::to_string(i) + "]"));
        }
        if (c.sweep.size() == 2 && c.sweep[0].name == c.sweep[1].name) {
            throw ConfigError("sweep[1].name", "duplicates sweep[0].name");
        }
    }

    if (j.contains("times")) {
        const auto& tj = j["times"];
        if (!tj.is_array()) throw ConfigError("times", "expected an array");
        for (std::size_t i = 0; i < tj.size(); ++i) {
            const std::string path = "times[" + std::to_string(i) + "]";
            const double t = number(tj[i], path);
            if (t <= 0.0) throw ConfigError(path, "must be > 0");
            c.times.push_back(t);
        }
    }
    const bool timed = c.mode != Mode::MarkovNess && c.mode != Mode::Qtur;
    if (timed && c.times.empty()) throw ConfigError("times", "required for mode " + std::string(to_string(c.mode)));
    if (!timed && !c.times.empty()) {
        throw ConfigError("times", "not used by mode " + std::string(to_string(c.mode)));
    }

    if (j.contains("chi_step")) {
        c.chi_step = number(j["chi_step"], "chi_step");
        if (c.chi_step <= 0.0) throw ConfigError("chi_step", "must be > 0");
    }
    if (j.contains("substeps")) {
        const long k = integer(j["substeps"], "substeps");
        if (k < 0 || k > 10'000) throw ConfigError("substeps", "must lie in [0, 10000]");
        c.substeps = static_cast<int>(k);
    }
    if (j.contains("entropy")) {
        c.entropy = detail::choice(j["entropy"], "entropy",
                                   std::array<std::pair<const char*, EntropyVariant>, 2>{
                                       {{"rate_times_t", EntropyVariant::RateTimesT},
                                        {"integrated_sigma", EntropyVariant::IntegratedSigma}}});
    }
    if (j.contains("max_collisions")) {
        c.max_collisions = integer(j["max_collisions"], "max_collisions");
        if (c.max_collisions < 1) throw ConfigError("max_collisions", "must be >= 1");
    }
    if (j.contains("blp")) {
        const auto& bj = j["blp"];
        detail::check_keys(bj, "blp", {"dynamics", "grid_points", "markov_dt"});
        if (bj.contains("dynamics")) {
            c.blp.dynamics = detail::choice(bj["dynamics"], "blp.dynamics",
                                            std::array<std::pair<const char*, BlpDynamics>, 3>{
                                                {{"nm1", BlpDynamics::Nm1},
                                                 {"nm2", BlpDynamics::Nm2},
                                                 {"markov", BlpDynamics::Markov}}});
        }
        if (bj.contains("grid_points")) {
            const long g = integer(bj["grid_points"], "blp.grid_points");
            if (g < 1 || g > 100'000) throw ConfigError("blp.grid_points", "must lie in [1, 100000]");
            c.blp.grid_points = static_cast<int>(g);
        }
        if (bj.contains("markov_dt")) {
            c.blp.markov_dt = number(bj["markov_dt"], "blp.markov_dt");
            if (c.blp.markov_dt <= 0.0) throw ConfigError("blp.markov_dt", "must be > 0");
        }
    }
    if (j.contains("output")) {
        const auto& oj = j["output"];
        detail::check_keys(oj, "output", {"path", "format"});
        if (oj.contains("path")) {
            const auto p = detail::text(oj["path"], "output.path");
            if (p.empty()) throw ConfigError("output.path", "must not be empty");
            c.output = p;
        }
        if (oj.contains("format")) {
            c.format = detail::choice(oj["format"], "output.format",
                                      std::array<std::pair<const char*, OutputFormat>, 2>{
                                          {{"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}}});
        }
    }
    if (j.contains("threads")) {
        const long t = integer(j["threads"], "threads");
        if (t < 0 || t > 4096) throw ConfigError("threads", "must lie in [0, 4096]");
        c.threads = static_cast<int>(t);
    }

    // Every grid corner must be a valid parameter set.
    for (std::size_t a = 0; a < c.sweep.size(); ++a) {
        for (double v : {c.sweep[a].min, c.sweep[a].max}) {
            ModelParams probe = c.params;
            probe.*param_field(c.sweep[a].name) = v;
            try {
                probe.validate();
            } catch (const Error& e) {
                throw ConfigError("sweep[" + std::to_string(a) + "]", e.what());
            }
        }
    }
    return c;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
    return parse_config(j);
}

} // namespace ctur::cli
