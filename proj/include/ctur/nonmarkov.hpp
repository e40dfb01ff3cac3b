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

// Finite-duration collisions (approach I) and the partial-SWAP ancilla chain
// (approach II). Both maps are linear in the carried state, so each
// collision is applied as a precomputed transfer superoperator: 4x4 on rho_S
// for approach I, 16x16 on the rolling S (x) A_j joint state for approach II.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ctur/fcs.hpp"
#include "ctur/markov.hpp"
#include "ctur/model.hpp"

namespace ctur {

struct TrajectoryPoint {
    int collision_index = 0;
    double time = 0.0;
    DensityMatrix rho_s;
    std::vector<DensityMatrix> substep_states; // intra-collision samples, approach I only
    std::vector<cplx> mgf;                     // M(chi, t) for each stencil chi
    CMatrix dissipator_action;                 // zero at the initial point
    double entropy_production = 0.0;           // rate over the collision ending here
};

/// A trajectory plus the counting-field stencil its `mgf` entries refer to.
struct Trajectory {
    double chi_step = 0.0; // h; zero when no counting field was requested
    std::vector<double> chi_stencil;
    std::vector<TrajectoryPoint> points;

    const TrajectoryPoint& final_point() const { return points.back(); }
};

/// Rolling system-ancilla state on S (x) A_j, immediately before S meets A_j.
struct JointState {
    DensityMatrix matrix;
};

enum class Dynamics { CollisionI, AncillaChainII };

namespace nonmarkov {

namespace detail {

inline CMatrix basis_matrix(Eigen::Index n, Eigen::Index r, Eigen::Index c) {
    CMatrix e = CMatrix::Zero(n, n);
    e(r, c) = 1.0;
    return e;
}

/// Reduced system state of a column-stacked S (x) A operator.
inline CMatrix system_part(const CVector& joint_vec) {
    return linalg::partial_trace(linalg::unvec(joint_vec), {2, 2}, {1});
}

/// Trace distance of two 2x2 Hermitian operators with equal trace.
inline double qubit_distance(const CMatrix& a, const CMatrix& b) {
    const CMatrix d = a - b;
    const double x = 0.5 * (d(0, 0).real() - d(1, 1).real());
    return std::sqrt(x * x + std::norm(d(0, 1)));
}

/// Divide a column-stacked density operator by its trace. The chi = 0 maps
/// are trace preserving, so this only removes accumulated round-off.
inline void renormalize(CVector& v) {
    const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(v.size()))));
    cplx tr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) tr += v(i * n + i);
    v /= tr.real();
}

inline double counting_relative_error(int steps) {
    return 8.0 * std::numeric_limits<double>::epsilon() * std::max(1, steps);
}

} // namespace detail

/// rho -> tr_A[U(chi)(rho (x) rho_A)U(-chi)^dagger] as a 4x4 column-stacked map.
inline CMatrix collision_map_nm1(const ModelParams& p, double chi, double duration) {
    const auto u = model::dressed_collision(p, chi, duration);
    const CMatrix anc = model::ancilla_state(p).matrix();
    CMatrix t(4, 4);
    for (Eigen::Index c = 0; c < 2; ++c) {
        for (Eigen::Index r = 0; r < 2; ++r) {
            const CMatrix in = linalg::kron(detail::basis_matrix(2, r, c), anc);
            const CMatrix out = linalg::partial_trace(u.forward * in * u.backward, {2, 2}, {1});
            t.col(c * 2 + r) = linalg::vec(out);
        }
    }
    return t;
}

inline CMatrix collision_map_nm1(const ModelParams& p, double chi) { return collision_map_nm1(p, chi, p.tau); }

/// One step of the ancilla chain on the joint state X of S (x) A_j:
/// X' = tr_{A_j}[W_{A_j A_{j+1}} U_{S A_j}(chi) (X (x) rho_A) U_{S A_j}(-chi)^dagger W^dagger].
/// The fresh ancilla is appended on the right and the used one traced from
/// the middle, leaving S (x) A_{j+1}.
inline CMatrix chain_step(const ModelParams& p, const CMatrix& joint, const model::DressedCollision& u) {
    const CMatrix id2 = linalg::identity(2);
    const CMatrix w = linalg::kron(id2, model::partial_swap(p.epsilon));
    const CMatrix in = linalg::kron(joint, model::ancilla_state(p).matrix());
    const CMatrix out = w * linalg::kron(u.forward, id2) * in * linalg::kron(u.backward, id2) * w.adjoint();
    return linalg::partial_trace(out, {2, 2, 2}, {1});
}

/// 16x16 column-stacked transfer map of chain_step.
inline CMatrix collision_map_nm2(const ModelParams& p, double chi) {
    const auto u = model::dressed_collision(p, chi);
    CMatrix t(16, 16);
    for (Eigen::Index c = 0; c < 4; ++c) {
        for (Eigen::Index r = 0; r < 4; ++r) {
            t.col(c * 4 + r) = linalg::vec(chain_step(p, detail::basis_matrix(4, r, c), u));
        }
    }
    return t;
}

/// (rho_j - rho_{j-1}) / tau + i [H~, rho_{j-1}].
inline CMatrix dissipator_nm1(const DensityMatrix& rho_prev, const DensityMatrix& rho_next, const ModelParams& p) {
    const CMatrix h = model::rotating_hamiltonian(p);
    const CMatrix& a = rho_prev.matrix();
    return (rho_next.matrix() - a) / p.tau + kI * (h * a - a * h);
}

/// Total dissipator of one chain collision starting from `joint_prev`:
/// (rho_j - rho_{j-1}) / tau + i tr_{A_j A_{j+1}}[W [H~ + H_A, X (x) rho_A] W^dagger].
inline CMatrix dissipator_nm2(const JointState& joint_prev, const ModelParams& p) {
    const CMatrix id2 = linalg::identity(2);
    const CMatrix& x = joint_prev.matrix.matrix();
    const CMatrix next = chain_step(p, x, model::dressed_collision(p, 0.0));
    const CMatrix rho_prev = linalg::partial_trace(x, {2, 2}, {1});
    const CMatrix rho_next = linalg::partial_trace(next, {2, 2}, {1});

    const CMatrix w = linalg::kron(id2, model::partial_swap(p.epsilon));
    const CMatrix h = linalg::kron({model::rotating_hamiltonian(p), id2, id2}) +
                      linalg::kron({id2, model::ancilla_hamiltonian(p), id2});
    const CMatrix in = linalg::kron(x, model::ancilla_state(p).matrix());
    const CMatrix comm = w * (h * in - in * h) * w.adjoint();
    return (rho_next - rho_prev) / p.tau + kI * linalg::partial_trace(comm, {2, 2, 2}, {1, 2});
}

namespace detail {

inline double collision_entropy_production(const ModelParams& p, const DensityMatrix& prev, const DensityMatrix& next,
                                           CMatrix& dissipator_out) {
    dissipator_out = dissipator_nm1(prev, next, p);
    return entropy_production_rate(p, prev, next, dissipator_out, p.tau);
}

struct StencilSetup {
    double step = 0.0;
    std::vector<double> chis;
};

inline StencilSetup stencil_setup(const ModelParams& p, bool counting, double chi_step) {
    StencilSetup s;
    if (!counting) return s;
    s.step = fcs::resolve_step(chi_step, p.omega_a);
    const auto pts = fcs::stencil_points(s.step);
    s.chis.assign(pts.begin(), pts.end());
    return s;
}

} // namespace detail

/// Approach I: n collisions from rho0. With `counting` the seven stencil
/// values of M(chi, t) are carried along; `substeps` > 0 records rho_S at
/// k tau / substeps inside each collision. A non-positive `chi_step` selects
/// the default stencil step.
inline Trajectory evolve_nm1(const ModelParams& p, const DensityMatrix& rho0, int n, bool counting = true,
                             int substeps = 0, double chi_step = 0.0) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "evolve_nm1: n must be >= 1");
    if (substeps < 0) throw Error(ErrorCode::InvalidArgument, "evolve_nm1: substeps must be >= 0");
    const auto setup = detail::stencil_setup(p, counting, chi_step);
    const CMatrix t0 = collision_map_nm1(p, 0.0);
    std::vector<CMatrix> maps;
    for (double chi : setup.chis) maps.push_back(collision_map_nm1(p, chi));
    std::vector<CMatrix> sub_maps;
    for (int k = 1; k <= substeps; ++k) sub_maps.push_back(collision_map_nm1(p, 0.0, p.tau * k / substeps));

    Trajectory traj{setup.step, setup.chis, {}};
    traj.points.reserve(static_cast<std::size_t>(n) + 1);
    CVector state = linalg::vec(rho0.matrix());
    std::vector<CVector> counted(setup.chis.size(), state);
    const CVector ident = linalg::vec(linalg::identity(2));

    traj.points.push_back({0, 0.0, rho0, {}, std::vector<cplx>(setup.chis.size(), 1.0), CMatrix::Zero(2, 2), 0.0});
    CVector next(4);
    for (int j = 1; j <= n; ++j) {
        TrajectoryPoint pt{j, j * p.tau, rho0, {}, {}, {}, 0.0};
        for (const auto& m : sub_maps) pt.substep_states.emplace_back(linalg::unvec(m * state));
        next.noalias() = t0 * state;
        state.swap(next);
        detail::renormalize(state);
        pt.rho_s = DensityMatrix(linalg::unvec(state));
        for (std::size_t k = 0; k < maps.size(); ++k) {
            next.noalias() = maps[k] * counted[k];
            counted[k].swap(next);
            pt.mgf.push_back(ident.dot(counted[k]));
        }
        pt.entropy_production =
            detail::collision_entropy_production(p, traj.points.back().rho_s, pt.rho_s, pt.dissipator_action);
        traj.points.push_back(std::move(pt));
    }
    return traj;
}

/// Approach II: the joint state starts as rho0 (x) rho_A.
inline Trajectory evolve_nm2(const ModelParams& p, const DensityMatrix& rho0, int n, bool counting = true,
                             double chi_step = 0.0) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "evolve_nm2: n must be >= 1");
    const auto setup = detail::stencil_setup(p, counting, chi_step);
    const CMatrix t0 = collision_map_nm2(p, 0.0);
    std::vector<CMatrix> maps;
    for (double chi : setup.chis) maps.push_back(collision_map_nm2(p, chi));

    Trajectory traj{setup.step, setup.chis, {}};
    traj.points.reserve(static_cast<std::size_t>(n) + 1);
    CVector state = linalg::vec(linalg::kron(rho0.matrix(), model::ancilla_state(p).matrix()));
    std::vector<CVector> counted(setup.chis.size(), state);
    const CVector ident = linalg::vec(linalg::identity(4));

    traj.points.push_back({0, 0.0, rho0, {}, std::vector<cplx>(setup.chis.size(), 1.0), CMatrix::Zero(2, 2), 0.0});
    CVector next(16);
    for (int j = 1; j <= n; ++j) {
        next.noalias() = t0 * state;
        state.swap(next);
        detail::renormalize(state);
        TrajectoryPoint pt{j, j * p.tau, DensityMatrix(detail::system_part(state)), {}, {}, {}, 0.0};
        for (std::size_t k = 0; k < maps.size(); ++k) {
            next.noalias() = maps[k] * counted[k];
            counted[k].swap(next);
            pt.mgf.push_back(ident.dot(counted[k]));
        }
        pt.entropy_production =
            detail::collision_entropy_production(p, traj.points.back().rho_s, pt.rho_s, pt.dissipator_action);
        traj.points.push_back(std::move(pt));
    }
    return traj;
}

inline Trajectory evolve(Dynamics kind, const ModelParams& p, const DensityMatrix& rho0, int n, bool counting = true,
                         double chi_step = 0.0) {
    return kind == Dynamics::CollisionI ? evolve_nm1(p, rho0, n, counting, 0, chi_step)
                                        : evolve_nm2(p, rho0, n, counting, chi_step);
}

/// Per-collision trace-distance threshold of the saturation detector.
inline constexpr double kSaturationThreshold = 1e-8;
inline constexpr long kDefaultMaxCollisions = 2'000'000;

struct Saturation {
    bool saturated = false;
    int collisions = 0;
    double time = 0.0;
    double entropy_production_rate = 0.0; // sigma at the last collision run
    CMatrix rho_s;
};

/// Run the chi = 0 dynamics until consecutive system states differ by less
/// than kSaturationThreshold in trace distance (three collisions in a row),
/// or until `max_collisions`.
inline Saturation saturate(Dynamics kind, const ModelParams& p, const DensityMatrix& rho0, long max_collisions) {
    const bool chain = kind == Dynamics::AncillaChainII;
    const CMatrix t0 = chain ? collision_map_nm2(p, 0.0) : collision_map_nm1(p, 0.0);
    CVector state = chain ? linalg::vec(linalg::kron(rho0.matrix(), model::ancilla_state(p).matrix()))
                          : linalg::vec(rho0.matrix());
    auto reduced = [&](const CVector& v) { return chain ? detail::system_part(v) : linalg::unvec(v); };

    Saturation out;
    CMatrix prev = reduced(state);
    CVector next(state.size());
    int quiet = 0;
    for (long j = 1; j <= max_collisions; ++j) {
        next.noalias() = t0 * state;
        state.swap(next);
        detail::renormalize(state);
        CMatrix cur = reduced(state);
        const double change = detail::qubit_distance(cur, prev);
        quiet = change < kSaturationThreshold ? quiet + 1 : 0;
        if (quiet >= 3 || j == max_collisions) {
            CMatrix diss;
            out.entropy_production_rate =
                detail::collision_entropy_production(p, DensityMatrix(prev), DensityMatrix(cur), diss);
            out.saturated = quiet >= 3;
            out.collisions = static_cast<int>(j);
            out.time = static_cast<double>(j) * p.tau;
            out.rho_s = cur;
            return out;
        }
        prev = std::move(cur);
    }
    return out;
}

/// Mean and variance of the exchanged heat at the final point of `traj`.
inline CurrentStats trajectory_cumulants(const Trajectory& traj) {
    if (traj.chi_stencil.size() != fcs::kStencilOffsets.size()) {
        throw Error(ErrorCode::InvalidArgument, "trajectory was evolved without a counting field");
    }
    const auto& last = traj.final_point();
    std::array<cplx, 7> mgf{};
    std::copy(last.mgf.begin(), last.mgf.end(), mgf.begin());
    const auto c = fcs::cumulants_from_mgf(mgf, traj.chi_step, detail::counting_relative_error(last.collision_index));
    return {markov::detail::checked_real(c.mean, "collisional mean", c.mean_roundoff),
            markov::detail::checked_real(c.variance, "collisional variance", c.variance_roundoff), last.time,
            Regime::FiniteTime};
}

/// Copy of `traj` holding points 0..last_index.
inline Trajectory truncated(const Trajectory& traj, std::size_t last_index) {
    if (last_index >= traj.points.size()) throw Error(ErrorCode::InvalidArgument, "truncation beyond trajectory");
    Trajectory out{traj.chi_step, traj.chi_stencil, {}};
    out.points.assign(traj.points.begin(), traj.points.begin() + static_cast<std::ptrdiff_t>(last_index) + 1);
    return out;
}

/// Sigma_t accumulated collision by collision: each per-collision rate is
/// the average over its own interval, so the sum is exact for the entropy
/// part and matches the discrete collision clock.
inline double integrated_entropy_production(const Trajectory& traj, double tau) {
    double total = 0.0;
    for (std::size_t j = 1; j < traj.points.size(); ++j) total += traj.points[j].entropy_production * tau;
    return total;
}

/// Finite-time classical TUR for a collisional trajectory. For RateTimesT
/// the steady-state rate comes from `steady_rate` when given (typically from
/// `saturate`), otherwise the trajectory itself must have saturated.
inline TURReport finite_time_tur_nm(const Trajectory& traj, const ModelParams& p, EntropyVariant variant,
                                    std::optional<double> steady_rate = std::nullopt) {
    const auto stats = trajectory_cumulants(traj);
    require_nonzero_mean(stats.mean);
    double entropy = 0.0;
    if (variant == EntropyVariant::IntegratedSigma) {
        entropy = integrated_entropy_production(traj, p.tau);
    } else {
        if (!steady_rate) {
            const auto& pts = traj.points;
            if (pts.size() < 4) throw Error(ErrorCode::NotSaturated, "trajectory too short to detect saturation");
            for (std::size_t k = pts.size() - 3; k < pts.size(); ++k) {
                if (detail::qubit_distance(pts[k].rho_s.matrix(), pts[k - 1].rho_s.matrix()) >= kSaturationThreshold) {
                    throw Error(ErrorCode::NotSaturated, "trajectory has not reached a steady state");
                }
            }
            steady_rate = pts.back().entropy_production;
        }
        entropy = *steady_rate * stats.time.value();
    }
    return {tur_ratio(stats, entropy), stats, entropy, 2.0, Regime::FiniteTime, variant};
}

/// Steady-state entropy production rate of the collisional dynamics, or
/// NotSaturated when no fixed point is detected within `max_collisions`.
inline double steady_entropy_production(Dynamics kind, const ModelParams& p, const DensityMatrix& rho0,
                                        long max_collisions = kDefaultMaxCollisions) {
    const auto sat = saturate(kind, p, rho0, max_collisions);
    if (!sat.saturated) throw Error(ErrorCode::NotSaturated, "no fixed point within the collision budget");
    return sat.entropy_production_rate;
}

/// Number of collisions closest to total time t (at least one).
inline int collisions_for_time(double t, double tau) {
    return static_cast<int>(std::max(1L, std::lround(t / tau)));
}

/// Q^FT at total time ~t for either collisional dynamics.
inline TURReport q_cl_ft(Dynamics kind, const ModelParams& p, const DensityMatrix& rho0, double t,
                         EntropyVariant variant = EntropyVariant::RateTimesT,
                         long max_collisions = kDefaultMaxCollisions, double chi_step = 0.0) {
    const auto traj = evolve(kind, p, rho0, collisions_for_time(t, p.tau), true, chi_step);
    if (variant == EntropyVariant::RateTimesT) {
        return finite_time_tur_nm(traj, p, variant, steady_entropy_production(kind, p, rho0, max_collisions));
    }
    return finite_time_tur_nm(traj, p, variant);
}

} // namespace nonmarkov
} // namespace ctur
