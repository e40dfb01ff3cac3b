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

// Sweep orchestration: grid expansion, per-point evaluation, static
// parallel partition, ordered CSV/JSON writers and the metadata sidecar.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ctur/cli/config.hpp"
#include "ctur/markov.hpp"
#include "ctur/nmq.hpp"
#include "ctur/nonmarkov.hpp"
#include "ctur/qtur.hpp"

#ifndef CTUR_VERSION
#define CTUR_VERSION "unknown"
#endif

namespace ctur::cli {

struct GridPoint {
    std::vector<double> axis_values;
    ModelParams params;
};

struct ResultRow {
    std::vector<double> axis_values;
    std::optional<double> time;
    std::optional<double> mean;
    std::optional<double> variance;
    std::optional<double> sigma; // rate for NESS rows, accumulated entropy for finite-time rows
    std::optional<double> q;
    std::optional<double> q_q;
    std::optional<double> n_value;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

/// Row status for a physics error. Spectral degeneracies share one label.
inline std::string status_of(ErrorCode code) {
    switch (code) {
    case ErrorCode::ZeroMeanCurrent: return "zero_mean_current";
    case ErrorCode::NotSaturated: return "not_saturated";
    case ErrorCode::DegenerateKernel:
    case ErrorCode::DegenerateSpectrum:
    case ErrorCode::NoUniqueSteadyState: return "degenerate_kernel";
    default: return std::string(to_string(code));
    }
}

inline std::vector<GridPoint> expand_grid(const ExperimentConfig& c) {
    std::vector<GridPoint> out;
    const int n0 = c.sweep.empty() ? 1 : c.sweep[0].points;
    const int n1 = c.sweep.size() < 2 ? 1 : c.sweep[1].points;
    for (int i = 0; i < n0; ++i) {
        for (int k = 0; k < n1; ++k) {
            GridPoint g{{}, c.params};
            if (!c.sweep.empty()) {
                g.axis_values.push_back(c.sweep[0].value(i));
                g.params.*param_field(c.sweep[0].name) = g.axis_values.back();
            }
            if (c.sweep.size() == 2) {
                g.axis_values.push_back(c.sweep[1].value(k));
                g.params.*param_field(c.sweep[1].name) = g.axis_values.back();
            }
            out.push_back(std::move(g));
        }
    }
    return out;
}

namespace detail {

inline void fill_report(ResultRow& row, const TURReport& r) {
    row.mean = r.stats.mean;
    row.variance = r.stats.variance;
    row.sigma = r.entropy_production;
    row.q = r.q;
}

/// Collisional rows: one counting trajectory to the largest time, read at
/// each requested time.
inline std::vector<ResultRow> evaluate_collisional(const ExperimentConfig& c, const GridPoint& g, Dynamics kind) {
    const auto& p = g.params;
    const auto rho0 = model::system_initial_state(p);
    std::vector<int> steps;
    for (double t : c.times) steps.push_back(nonmarkov::collisions_for_time(t, p.tau));
    const int n_max = *std::max_element(steps.begin(), steps.end());

    std::optional<double> steady_rate;
    std::string steady_status;
    if (c.entropy == EntropyVariant::RateTimesT) {
        try {
            steady_rate = nonmarkov::steady_entropy_production(kind, p, rho0, c.max_collisions);
        } catch (const Error& e) {
            steady_status = status_of(e.code());
        }
    }
    const auto traj = nonmarkov::evolve(kind, p, rho0, n_max, true, c.chi_step);

    std::vector<ResultRow> rows;
    for (int n : steps) {
        ResultRow row{g.axis_values};
        row.time = n * p.tau;
        try {
            const auto part = nonmarkov::truncated(traj, static_cast<std::size_t>(n));
            if (!steady_status.empty()) {
                row.status = steady_status;
            } else {
                fill_report(row, nonmarkov::finite_time_tur_nm(part, p, c.entropy, steady_rate));
            }
        } catch (const Error& e) {
            row = ResultRow{g.axis_values, n * p.tau};
            row.status = status_of(e.code());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<ResultRow> evaluate_blp(const ExperimentConfig& c, const GridPoint& g) {
    const auto& p = g.params;
    const auto grid = nmq::antipodal_grid(c.blp.grid_points);
    std::vector<std::size_t> checkpoints;
    std::vector<double> times;
    nmq::Sampler sampler;
    if (c.blp.dynamics == BlpDynamics::Markov) {
        for (double t : c.times) {
            checkpoints.push_back(static_cast<std::size_t>(std::max(1L, std::lround(t / c.blp.markov_dt))));
            times.push_back(static_cast<double>(checkpoints.back()) * c.blp.markov_dt);
        }
        sampler = nmq::markov_sampler(p, c.blp.markov_dt,
                                      static_cast<int>(*std::max_element(checkpoints.begin(), checkpoints.end())));
    } else {
        const bool nm1 = c.blp.dynamics == BlpDynamics::Nm1;
        const std::size_t per = nm1 ? static_cast<std::size_t>(std::max(1, c.substeps)) : 1;
        int n_max = 1;
        for (double t : c.times) {
            const int n = nonmarkov::collisions_for_time(t, p.tau);
            n_max = std::max(n_max, n);
            checkpoints.push_back(static_cast<std::size_t>(n) * per);
            times.push_back(n * p.tau);
        }
        sampler = nm1 ? nmq::nm1_sampler(p, n_max, c.substeps) : nmq::nm2_sampler(p, n_max);
    }
    const auto values = nmq::blp_profile(sampler, grid, checkpoints);
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ResultRow row{g.axis_values, times[i]};
        row.n_value = values[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

/// All rows of one grid point, in `times` order. Physics errors become row
/// statuses and never escape.
inline std::vector<ResultRow> evaluate_point(const ExperimentConfig& c, const GridPoint& g) {
    auto failed = [&](const Error& e, std::optional<double> t) {
        ResultRow row{g.axis_values, t};
        row.status = status_of(e.code());
        return row;
    };
    const auto& p = g.params;
    switch (c.mode) {
    case Mode::MarkovNess:
    case Mode::Qtur: {
        ResultRow row{g.axis_values};
        try {
            detail::fill_report(row, markov::q_cl(p, c.chi_step));
            if (c.mode == Mode::Qtur) row.q_q = qtur::q_quantum(p).q_q;
        } catch (const Error& e) {
            return {failed(e, std::nullopt)};
        }
        return {row};
    }
    case Mode::MarkovFt: {
        std::vector<ResultRow> rows;
        const auto rho0 = model::system_initial_state(p);
        for (double t : c.times) {
            ResultRow row{g.axis_values, t};
            try {
                detail::fill_report(row, markov::q_cl_ft(p, rho0, t, c.entropy, c.chi_step));
                rows.push_back(std::move(row));
            } catch (const Error& e) {
                rows.push_back(failed(e, t));
            }
        }
        return rows;
    }
    case Mode::Nm1: return detail::evaluate_collisional(c, g, Dynamics::CollisionI);
    case Mode::Nm2: return detail::evaluate_collisional(c, g, Dynamics::AncillaChainII);
    case Mode::Blp:
        try {
            return detail::evaluate_blp(c, g);
        } catch (const Error& e) {
            std::vector<ResultRow> rows;
            for (double t : c.times) rows.push_back(failed(e, t));
            return rows;
        }
    }
    return {};
}

/// Worker count: the configured value (or hardware concurrency when 0),
/// capped by the CTUR_THREADS environment variable and by the work size.
inline int resolve_threads(int configured, std::size_t work) {
    int n = configured > 0 ? configured : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("CTUR_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) n = std::min<int>(n, static_cast<int>(cap));
    }
    return std::max(1, std::min<int>(n, static_cast<int>(std::max<std::size_t>(1, work))));
}

/// Evaluate every grid point with a static cyclic partition over workers.
/// Output order is grid order regardless of the worker count.
inline std::vector<ResultRow> run_sweep(const ExperimentConfig& c, int threads) {
    const auto grid = expand_grid(c);
    std::vector<std::vector<ResultRow>> per_point(grid.size());
    auto work = [&](int w, int stride) {
        for (std::size_t i = static_cast<std::size_t>(w); i < grid.size(); i += static_cast<std::size_t>(stride)) {
            per_point[i] = evaluate_point(c, grid[i]);
        }
    };
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
    }
    std::vector<ResultRow> rows;
    for (auto& block : per_point) {
        for (auto& r : block) rows.push_back(std::move(r));
    }
    return rows;
}

/// 12 significant digits, shortest form.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::vector<std::string> column_names(const ExperimentConfig& c) {
    std::vector<std::string> cols;
    for (const auto& a : c.sweep) cols.push_back(a.name);
    for (const char* k : {"t", "mean", "variance", "sigma", "Q", "Q_q", "N", "status"}) cols.emplace_back(k);
    return cols;
}

inline std::vector<std::optional<double>> row_numbers(const ResultRow& r) {
    std::vector<std::optional<double>> out(r.axis_values.begin(), r.axis_values.end());
    for (const auto& v : {r.time, r.mean, r.variance, r.sigma, r.q, r.q_q, r.n_value}) out.push_back(v);
    return out;
}

inline void write_csv(std::ostream& os, const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
    const auto cols = column_names(c);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : rows) {
        for (const auto& v : row_numbers(r)) os << (v ? format_number(*v) : "") << ',';
        os << r.status << '\n';
    }
}

inline void write_json(std::ostream& os, const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
    const auto cols = column_names(c);
    nlohmann::ordered_json doc;
    doc["mode"] = to_string(c.mode);
    doc["columns"] = cols;
    auto& out = doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        const auto nums = row_numbers(r);
        for (std::size_t i = 0; i < nums.size(); ++i) {
            if (nums[i]) obj[cols[i]] = std::stod(format_number(*nums[i]));
        }
        obj["status"] = r.status;
        out.push_back(std::move(obj));
    }
    os << doc.dump(2) << '\n';
}

/// 64-bit FNV-1a of the configuration bytes, as 16 hex digits.
inline std::string config_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunMetadata {
    std::string config_path;
    std::string config_hash;
    double wall_time_s = 0.0;
    int threads = 1;
    std::size_t rows = 0;
    std::size_t failed_rows = 0;
};

inline void write_metadata(std::ostream& os, const ExperimentConfig& c, const RunMetadata& m) {
    nlohmann::ordered_json doc;
    doc["code_version"] = CTUR_VERSION;
    doc["config"] = m.config_path;
    doc["config_hash"] = m.config_hash;
    doc["mode"] = to_string(c.mode);
    doc["rows"] = m.rows;
    doc["failed_rows"] = m.failed_rows;
    doc["threads"] = m.threads;
    doc["wall_time_s"] = m.wall_time_s;
    doc["timestamp"] = utc_timestamp();
    os << doc.dump(2) << '\n';
}

} // namespace ctur::cli
