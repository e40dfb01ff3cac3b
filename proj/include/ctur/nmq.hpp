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

// Breuer-Laine-Piilo style non-Markovianity: total growth of the trace
// distance between two evolving system states, maximised over a grid of
// antipodal pure initial pairs.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "ctur/markov.hpp"
#include "ctur/nonmarkov.hpp"

namespace ctur {

struct BLPResult {
    double n_value = 0.0;
    std::pair<DensityMatrix, DensityMatrix> best_pair;
    std::vector<std::pair<int, double>> increments; // (sample index k, D_k - D_{k-1}) of the best pair
};

namespace nmq {

/// Increments at or below this are treated as numerical noise.
inline constexpr double kIncrementFloor = 1e-12;

/// D = (1/2) ||rho1 - rho2||_1.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw Error(ErrorCode::InvalidArgument, "trace_distance: dimension mismatch");
    if (a.dim() == 2) return nonmarkov::detail::qubit_distance(a.matrix(), b.matrix());
    return 0.5 * linalg::trace_norm(a.matrix() - b.matrix());
}

/// Pure state with Bloch vector (sin th cos ph, sin th sin ph, cos th).
inline DensityMatrix bloch_state(double x, double y, double z) {
    CMatrix m(2, 2);
    m << 0.5 * (1.0 + z), 0.5 * cplx(x, -y), 0.5 * cplx(x, y), 0.5 * (1.0 - z);
    return DensityMatrix(m);
}

/// Antipodal pure pairs along `count` near-uniform Bloch directions.
inline std::vector<std::pair<DensityMatrix, DensityMatrix>> antipodal_grid(int count = 64) {
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "antipodal_grid: count must be positive");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<std::pair<DensityMatrix, DensityMatrix>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double x = r * std::cos(golden * i), y = r * std::sin(golden * i);
        out.emplace_back(bloch_state(x, y, z), bloch_state(-x, -y, -z));
    }
    return out;
}

/// Maps an initial system state to its sampled trajectory (initial state included).
using Sampler = std::function<std::vector<DensityMatrix>(const DensityMatrix&)>;

/// Sum of positive increments of D along two sampled trajectories.
inline double positive_growth(const std::vector<DensityMatrix>& a, const std::vector<DensityMatrix>& b,
                              std::vector<std::pair<int, double>>* increments = nullptr) {
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "trajectories differ in length");
    double total = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
        const double inc = trace_distance(a[k], b[k]) - trace_distance(a[k - 1], b[k - 1]);
        if (inc > kIncrementFloor) {
            total += inc;
            if (increments) increments->emplace_back(static_cast<int>(k), inc);
        }
    }
    return total;
}

inline BLPResult blp_measure(const Sampler& dynamics,
                             const std::vector<std::pair<DensityMatrix, DensityMatrix>>& grid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "blp_measure: empty grid");
    BLPResult best{-1.0, grid.front(), {}};
    for (const auto& pair : grid) {
        std::vector<std::pair<int, double>> inc;
        const double n = positive_growth(dynamics(pair.first), dynamics(pair.second), &inc);
        if (n > best.n_value) best = {n, pair, std::move(inc)};
    }
    return best;
}

/// N restricted to the first checkpoints[i] + 1 samples, for every i, from
/// one propagation per grid state. Checkpoints index the sample sequence.
inline std::vector<double> blp_profile(const Sampler& dynamics,
                                       const std::vector<std::pair<DensityMatrix, DensityMatrix>>& grid,
                                       const std::vector<std::size_t>& checkpoints) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "blp_profile: empty grid");
    std::vector<double> best(checkpoints.size(), 0.0);
    for (const auto& pair : grid) {
        const auto a = dynamics(pair.first);
        const auto b = dynamics(pair.second);
        if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "trajectories differ in length");
        std::vector<double> running(a.size(), 0.0);
        double prev = trace_distance(a[0], b[0]);
        for (std::size_t k = 1; k < a.size(); ++k) {
            const double d = trace_distance(a[k], b[k]);
            running[k] = running[k - 1] + (d - prev > kIncrementFloor ? d - prev : 0.0);
            prev = d;
        }
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            if (checkpoints[i] >= a.size()) throw Error(ErrorCode::InvalidArgument, "checkpoint beyond trajectory");
            best[i] = std::max(best[i], running[checkpoints[i]]);
        }
    }
    return best;
}

/// Approach I sampled at `substeps` points inside each of n collisions
/// (only at collision boundaries when substeps is 0).
inline Sampler nm1_sampler(const ModelParams& p, int n, int substeps = 20) {
    std::vector<CMatrix> sub;
    for (int k = 1; k <= substeps; ++k) sub.push_back(nonmarkov::collision_map_nm1(p, 0.0, p.tau * k / substeps));
    const CMatrix full = nonmarkov::collision_map_nm1(p, 0.0);
    return [sub, full, n](const DensityMatrix& rho0) {
        std::vector<DensityMatrix> out{rho0};
        out.reserve(static_cast<std::size_t>(n) * std::max<std::size_t>(1, sub.size()) + 1);
        CVector v = linalg::vec(rho0.matrix());
        for (int j = 0; j < n; ++j) {
            for (const auto& m : sub) out.emplace_back(linalg::unvec(m * v));
            v = full * v;
            nonmarkov::detail::renormalize(v);
            if (sub.empty()) out.emplace_back(linalg::unvec(v));
        }
        return out;
    };
}

/// Approach II sampled once per collision.
inline Sampler nm2_sampler(const ModelParams& p, int n) {
    const CMatrix step = nonmarkov::collision_map_nm2(p, 0.0);
    const CMatrix anc = model::ancilla_state(p).matrix();
    return [step, anc, n](const DensityMatrix& rho0) {
        std::vector<DensityMatrix> out{rho0};
        out.reserve(static_cast<std::size_t>(n) + 1);
        CVector v = linalg::vec(linalg::kron(rho0.matrix(), anc));
        for (int j = 0; j < n; ++j) {
            v = step * v;
            nonmarkov::detail::renormalize(v);
            out.emplace_back(nonmarkov::detail::system_part(v));
        }
        return out;
    };
}

/// Markovian evolution sampled every dt for n samples.
inline Sampler markov_sampler(const ModelParams& p, double dt, int n) {
    return [p, dt, n](const DensityMatrix& rho0) {
        const CMatrix step = linalg::expm(markov::build_liouvillian(p, 0.0).matrix, dt);
        std::vector<DensityMatrix> out{rho0};
        CVector v = linalg::vec(rho0.matrix());
        for (int k = 0; k < n; ++k) {
            v = step * v;
            out.emplace_back(linalg::unvec(v));
        }
        return out;
    };
}

} // namespace nmq
} // namespace ctur
