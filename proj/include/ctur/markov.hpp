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

// Markovian (tau -> 0) limit of the collision model: the counting-field
// GKSL generator, its steady state, heat-current cumulants and the classical
// TUR ratios built from them.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ctur/fcs.hpp"
#include "ctur/linalg.hpp"
#include "ctur/model.hpp"

namespace ctur {

struct Liouvillian {
    double chi = 0.0;
    CMatrix matrix;
    ModelParams params;
};

enum class Regime { NessScaled, FiniteTime };

/// Heat-current statistics. Positive mean = energy absorbed by the system
/// from the ancillas. NESS values are per unit time.
struct CurrentStats {
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> time; // empty for the asymptotic (scaled) regime
    Regime regime = Regime::NessScaled;
};

enum class EntropyVariant {
    RateTimesT,      // steady-state entropy production rate times t
    IntegratedSigma, // Sigma_t, the integral of sigma_t over [0, t]
};

struct TURReport {
    double q = 0.0;
    CurrentStats stats;
    double entropy_production = 0.0; // rate (NESS) or accumulated entropy (finite time)
    double bound = 2.0;
    Regime regime = Regime::NessScaled;
    EntropyVariant variant = EntropyVariant::RateTimesT;

    bool violates() const { return q < bound; }
};

/// Guard shared by every TUR ratio.
inline void require_nonzero_mean(double mean) {
    if (!(std::abs(mean) > 1e-12)) throw Error(ErrorCode::ZeroMeanCurrent, "mean heat current vanishes");
}

inline double tur_ratio(const CurrentStats& stats, double entropy) {
    require_nonzero_mean(stats.mean);
    return stats.variance / (stats.mean * stats.mean) * entropy;
}

/// Von Neumann entropy -tr rho ln rho (k_B = 1).
inline double von_neumann_entropy(const DensityMatrix& rho) {
    double s = 0.0;
    for (double w : rho.eigenvalues()) {
        if (w > 1e-300) s -= w * std::log(w);
    }
    return s;
}

/// Entropy flux -(1/T_A) tr[H_S D~] for a total-dissipator output D~.
inline double entropy_flux(const ModelParams& p, const CMatrix& dissipator_action) {
    return -(model::system_hamiltonian(p) * dissipator_action).trace().real() / p.temp_a;
}

/// Finite-difference dS/dt plus the entropy flux of `dissipator_action`.
inline double entropy_production_rate(const ModelParams& p, const DensityMatrix& rho_prev,
                                      const DensityMatrix& rho_next, const CMatrix& dissipator_action,
                                      double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
    return (von_neumann_entropy(rho_next) - von_neumann_entropy(rho_prev)) / dt +
           entropy_flux(p, dissipator_action);
}

namespace markov {

/// One Lindblad channel; `phase_energy` is the energy the counting field
/// tags on a jump (the phase is e^{i chi phase_energy}).
struct JumpChannel {
    CMatrix op;
    double phase_energy = 0.0;
};

/// {g1 sqrt(gamma1) s-, g1 sqrt(gamma2) s+, g2 s_z}.
inline std::vector<JumpChannel> jump_channels(const ModelParams& p) {
    const auto rates = model::exchange_rates(model::ancilla_state(p));
    return {
        {p.g1 * std::sqrt(rates.gamma1) * pauli::minus(), -p.omega_a},
        {p.g1 * std::sqrt(rates.gamma2) * pauli::plus(), p.omega_a},
        {p.g2 * pauli::z(), 0.0},
    };
}

inline CMatrix hamiltonian_superop(const CMatrix& h) {
    const auto n = h.rows();
    return -kI * (linalg::kron(linalg::identity(n), h) - linalg::kron(h.transpose(), linalg::identity(n)));
}

inline CMatrix dissipator_superop(const CMatrix& a, cplx jump_phase = 1.0) {
    const auto n = a.rows();
    const CMatrix ada = a.adjoint() * a;
    return jump_phase * linalg::kron(a.conjugate(), a) - 0.5 * linalg::kron(linalg::identity(n), ada) -
           0.5 * linalg::kron(ada.transpose(), linalg::identity(n));
}

/// Counting-field generator assembled from the shifted Hamiltonian and the
/// dressed jump channels.
inline Liouvillian build_liouvillian(const ModelParams& p, double chi) {
    CMatrix l = hamiltonian_superop(model::shifted_hamiltonian(p));
    for (const auto& ch : jump_channels(p)) {
        l += dissipator_superop(ch.op, std::exp(kI * chi * ch.phase_energy));
    }
    return {chi, l, p};
}

/// Gamma, Delta, zeta of the closed-form generator; each carries the common
/// factor sqrt(tau) (1 + e^{omega_A/T_A}).
struct ClosedFormRates {
    double gamma;
    double delta;
    double zeta;
};

inline ClosedFormRates closed_form_rates(const ModelParams& p) {
    const double e = std::exp(p.omega_a / p.temp_a);
    const double root = std::sqrt(p.tau);
    return {root * (0.5 * p.g1 * p.g1 + 2.0 * p.g2 * p.g2) * (1.0 + e),
            root * (1.0 + e) * (p.omega_s - p.omega) + 2.0 * p.g2 * (1.0 - e), root * (1.0 + e)};
}

/// Explicit 4x4 generator in the column-stacked basis (rho_00, rho_10, rho_01, rho_11).
inline Liouvillian closed_form_liouvillian(const ModelParams& p, double chi) {
    const double e = std::exp(p.omega_a / p.temp_a);
    const auto [gamma, delta, zeta] = closed_form_rates(p);
    const double g1sq = p.g1 * p.g1;
    const cplx inu = kI * p.nu;
    CMatrix l(4, 4);
    l << g1sq * (1.0 / (1.0 + e) - 1.0), -inu, inu, g1sq * std::exp(kI * chi * p.omega_a) / (1.0 + e),
        -inu, cplx(-gamma, delta) / zeta, 0.0, inu,
        inu, 0.0, cplx(-gamma, -delta) / zeta, -inu,
        g1sq * std::exp(-kI * chi * p.omega_a) / (1.0 + 1.0 / e), inu, -inu, -g1sq / (1.0 + e);
    return {chi, l, p};
}

inline DensityMatrix steady_state_analytic(const ModelParams& p) {
    const double e = std::exp(p.omega_a / p.temp_a);
    const auto [gamma, delta, zeta] = closed_form_rates(p);
    const double g1sq = p.g1 * p.g1;
    const double nu2 = p.nu * p.nu;
    const double denom = g1sq * (delta * delta + gamma * gamma) + 4.0 * gamma * zeta * nu2;
    if (!(denom > 0.0)) throw Error(ErrorCode::NoUniqueSteadyState, "closed-form steady state is undefined");
    const double r00 = (g1sq * (delta * delta + gamma * gamma) + (1.0 + e) * 2.0 * gamma * zeta * nu2) /
                       (denom * (1.0 + e));
    const double r11 = 1.0 - r00;
    CMatrix rho(2, 2);
    rho(0, 0) = r00;
    rho(1, 1) = r11;
    rho(1, 0) = zeta * p.nu * (r00 - r11) / cplx(delta, gamma);
    rho(0, 1) = zeta * p.nu * (r00 - r11) / cplx(delta, -gamma);
    return DensityMatrix(rho);
}

/// Steady state from the kernel of the chi = 0 generator.
inline DensityMatrix steady_state_numeric(const ModelParams& p) {
    const CVector v = linalg::null_vector(build_liouvillian(p, 0.0).matrix);
    CMatrix rho = linalg::unvec(v);
    return DensityMatrix(rho / rho.trace());
}

/// Total dissipator D~(rho) = -i[H_shift, rho] + D(rho): the generator minus
/// the bare rotating-frame commutator.
inline CMatrix dissipator_action(const ModelParams& p, const CMatrix& rho) {
    const CMatrix h = model::rotating_hamiltonian(p);
    const CMatrix l_rho = linalg::unvec(build_liouvillian(p, 0.0).matrix * linalg::vec(rho));
    return l_rho + kI * (h * rho - rho * h);
}

inline double steady_entropy_production(const ModelParams& p, const DensityMatrix& rho_ss) {
    return entropy_flux(p, dissipator_action(p, rho_ss.matrix()));
}

inline DensityMatrix evolve(const ModelParams& p, const DensityMatrix& rho0, double t) {
    const CMatrix prop = linalg::expm(build_liouvillian(p, 0.0).matrix, t);
    CMatrix rho = linalg::unvec(prop * linalg::vec(rho0.matrix()));
    return DensityMatrix(rho);
}

/// Sigma_t = S(t) - S(0) + int_0^t J(rho(s)) ds, with the time integral of
/// the state taken exactly from the block exponential [[L, 1], [0, 0]].
inline double integrated_entropy_production(const ModelParams& p, const DensityMatrix& rho0, double t) {
    const CMatrix l = build_liouvillian(p, 0.0).matrix;
    const auto n = l.rows();
    CMatrix block = CMatrix::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = l;
    block.topRightCorner(n, n) = linalg::identity(n);
    const CMatrix e = linalg::expm(block, t);
    const CVector v0 = linalg::vec(rho0.matrix());
    const DensityMatrix rho_t(linalg::unvec(e.topLeftCorner(n, n) * v0));
    const CMatrix integral = linalg::unvec(e.topRightCorner(n, n) * v0);
    return von_neumann_entropy(rho_t) - von_neumann_entropy(rho0) +
           entropy_flux(p, dissipator_action(p, integral));
}

/// Derivatives a_k', a_k'' of the characteristic-polynomial coefficients
/// and a_k at chi = 0, indexed by power of lambda.
struct CharPolyDerivatives {
    CVector value;
    CVector first;
    CVector second;
};

inline CharPolyDerivatives char_poly_derivatives(const ModelParams& p, double chi_step = 0.0) {
    const double h = fcs::resolve_step(chi_step, p.omega_a);
    const auto d = fcs::differentiate(
        [&](double chi) {
            const auto c = linalg::char_poly_coeffs(build_liouvillian(p, chi).matrix);
            return CVector(Eigen::Map<const CVector>(c.data(), static_cast<Eigen::Index>(c.size())));
        },
        h);
    return {d.value, d.first, d.second};
}

/// The explicit a-coefficients of the 4x4 closed form.
struct ClosedFormCoefficients {
    double a0_first;
    double a0_second;
    double a1;
    double a1_first;
    double a2;
};

inline ClosedFormCoefficients closed_form_coefficients(const ModelParams& p) {
    const double e = std::exp(p.omega_a / p.temp_a);
    const auto [gamma, delta, zeta] = closed_form_rates(p);
    const double g1sq = p.g1 * p.g1;
    const double nu2 = p.nu * p.nu;
    const double w = p.omega_a;
    return {
        2.0 * gamma * g1sq * nu2 * w * (e - 1.0) / (zeta * (1.0 + e)),
        -2.0 * gamma * g1sq * nu2 * w * w / zeta,
        (4.0 * gamma * zeta * nu2 + g1sq * (gamma * gamma + delta * delta)) / (zeta * zeta),
        2.0 * g1sq * nu2 * w * (e - 1.0) / (1.0 + e),
        (gamma * gamma + delta * delta + 4.0 * zeta * zeta * nu2 + 2.0 * gamma * zeta * g1sq) / (zeta * zeta),
    };
}

/// var/mean^2 of the scaled current straight from Gamma, Delta, zeta.
inline double closed_form_fano_ratio(const ModelParams& p) {
    const double e = std::exp(p.omega_a / p.temp_a);
    const auto [gamma, delta, zeta] = closed_form_rates(p);
    const double g1sq = p.g1 * p.g1;
    const double nu2 = p.nu * p.nu;
    const double gd = gamma * gamma + delta * delta;
    return 2.0 * zeta / gamma +
           (1.0 + e) * (1.0 + e) * (2.0 * gamma * zeta * nu2 + g1sq * 0.5 * gd) /
               (gamma * zeta * g1sq * nu2 * (1.0 - e) * (1.0 - e)) -
           (2.0 * (gd + 4.0 * zeta * zeta * nu2) + 4.0 * gamma * zeta * g1sq) / (4.0 * gamma * zeta * nu2 + g1sq * gd);
}

namespace detail {

/// Real part of v; `roundoff` widens the allowed imaginary residue.
inline double checked_real(cplx v, const char* what, double roundoff = 0.0) {
    if (!std::isfinite(v.real()) || std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v.real())) + roundoff) {
        throw Error(ErrorCode::NumericalBreakdown, std::string(what) + " is not real");
    }
    return v.real();
}

} // namespace detail

/// Scaled NESS mean and variance from the characteristic polynomial:
/// J = -a0'/a1, var = -(a0'' + 2 J (a1' + a2 J)) / a1.
inline CurrentStats ness_cumulants(const ModelParams& p, double chi_step = 0.0) {
    const auto d = char_poly_derivatives(p, chi_step);
    const cplx a1 = d.value(1);
    const double scale = d.value.cwiseAbs().maxCoeff();
    if (std::abs(a1) <= 1e-14 * std::max(1.0, scale)) {
        throw Error(ErrorCode::DegenerateSpectrum, "a1 vanishes: zero eigenvalue is not simple");
    }
    const cplx mean = -d.first(0) / a1;
    const cplx var = -(d.second(0) + 2.0 * mean * (d.first(1) + d.value(2) * mean)) / a1;
    return {detail::checked_real(mean, "NESS mean"), detail::checked_real(var, "NESS variance"), std::nullopt,
            Regime::NessScaled};
}

/// Verification route: derivatives of the eigenvalue with the largest real part.
inline CurrentStats ness_cumulants_spectral(const ModelParams& p) {
    const double h = fcs::default_step(p.omega_a);
    const auto d = fcs::differentiate(
        [&](double chi) {
            Eigen::ComplexEigenSolver<CMatrix> es(build_liouvillian(p, chi).matrix, false);
            const auto& ev = es.eigenvalues();
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < ev.size(); ++i) {
                if (ev(i).real() > ev(best).real()) best = i;
            }
            return CVector::Constant(1, ev(best));
        },
        h, 1e-13);
    return {detail::checked_real(d.first(0), "spectral mean"), detail::checked_real(d.second(0), "spectral variance"),
            std::nullopt, Regime::NessScaled};
}

/// M(chi, t) = <<1| exp(L(chi) t) |rho0>>.
inline cplx moment_generating(const ModelParams& p, const DensityMatrix& rho0, double chi, double t) {
    const CVector out = linalg::expm(build_liouvillian(p, chi).matrix, t) * linalg::vec(rho0.matrix());
    return linalg::vec(linalg::identity(2)).dot(out);
}

inline CurrentStats finite_time_cumulants(const ModelParams& p, const DensityMatrix& rho0, double t,
                                         double chi_step = 0.0) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be > 0");
    const double h = fcs::resolve_step(chi_step, p.omega_a);
    const auto chis = fcs::stencil_points(h);
    std::array<cplx, 7> mgf{};
    for (std::size_t i = 0; i < chis.size(); ++i) mgf[i] = moment_generating(p, rho0, chis[i], t);
    const double norm = build_liouvillian(p, 0.0).matrix.cwiseAbs().colwise().sum().maxCoeff();
    const auto c = fcs::cumulants_from_mgf(mgf, h, 1e-14 * std::max(1.0, norm * t));
    return {detail::checked_real(c.mean, "finite-time mean", c.mean_roundoff),
            detail::checked_real(c.variance, "finite-time variance", c.variance_roundoff), t, Regime::FiniteTime};
}

/// Classical NESS ratio var/mean^2 * sigma with sigma the steady-state
/// entropy production rate (entropy flux, dS/dt = 0).
inline TURReport q_cl(const ModelParams& p, double chi_step = 0.0) {
    const auto stats = ness_cumulants(p, chi_step);
    require_nonzero_mean(stats.mean);
    const double sigma = steady_entropy_production(p, steady_state_analytic(p));
    return {tur_ratio(stats, sigma), stats, sigma, 2.0, Regime::NessScaled, EntropyVariant::RateTimesT};
}

inline TURReport q_cl_ft(const ModelParams& p, const DensityMatrix& rho0, double t,
                         EntropyVariant variant = EntropyVariant::RateTimesT, double chi_step = 0.0) {
    const auto stats = finite_time_cumulants(p, rho0, t, chi_step);
    require_nonzero_mean(stats.mean);
    const double entropy = variant == EntropyVariant::RateTimesT
                               ? steady_entropy_production(p, steady_state_analytic(p)) * t
                               : integrated_entropy_production(p, rho0, t);
    return {tur_ratio(stats, entropy), stats, entropy, 2.0, Regime::FiniteTime, variant};
}

} // namespace markov
} // namespace ctur
