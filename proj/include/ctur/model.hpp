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

// Physical operators of the driven-qubit collisional model. Natural units
// hbar = k_B = t' = 1. Basis: |0> = excited (sigma_z = +1), |1> = ground.
// Tensor order: S (x) A_j, and S (x) A_j (x) A_{j+1} for three bodies.

#include <cmath>
#include <numbers>
#include <string>

#include "ctur/linalg.hpp"

namespace ctur {

struct ModelParams {
    double omega_s = 1.0;  // system frequency
    double omega_a = 1.25; // ancilla frequency
    double omega = 1.0;    // drive rotation frequency
    double nu = 0.05;      // drive strength
    double g1 = 0.45;      // exchange coupling
    double g2 = 1e-4;      // dephasing coupling
    double temp_s = 0.1;
    double temp_a = 0.5;
    double tau = 1e-5;     // collision duration
    double epsilon = 0.0;  // ancilla-ancilla partial-swap angle

    void validate() const {
        auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
        for (double v : {omega_s, omega_a, omega, nu, g1, g2, temp_s, temp_a, tau, epsilon}) {
            if (!std::isfinite(v)) fail("non-finite model parameter");
        }
        if (temp_s <= 0.0) fail("temp_s must be > 0");
        if (temp_a <= 0.0) fail("temp_a must be > 0");
        if (tau <= 0.0) fail("tau must be > 0");
        if (epsilon < 0.0 || epsilon > std::numbers::pi / 2 + 1e-15) fail("epsilon must lie in [0, pi/2]");
        if (g1 < 0.0) fail("g1 must be >= 0");
        if (g2 < 0.0) fail("g2 must be >= 0");
        if (nu < 0.0) fail("nu must be >= 0");
    }
};

/// Hermitian, unit-trace, positive semidefinite matrix. Construction checks
/// the invariants and stores the exact Hermitian part.
class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kEigenFloor = -1e-10;

    explicit DensityMatrix(const CMatrix& m) {
        if (m.rows() != m.cols() || m.rows() == 0) {
            throw Error(ErrorCode::InvalidState, "density matrix must be square and non-empty");
        }
        if (linalg::hermiticity_defect(m) > kHermitianTol) {
            throw Error(ErrorCode::InvalidState, "density matrix is not Hermitian");
        }
        matrix_ = 0.5 * (m + m.adjoint());
        if (std::abs(matrix_.trace() - 1.0) > kTraceTol) {
            throw Error(ErrorCode::InvalidState, "density matrix trace differs from 1");
        }
        if (min_eigenvalue() < kEigenFloor) {
            throw Error(ErrorCode::InvalidState, "density matrix has a negative eigenvalue");
        }
    }

    Eigen::Index dim() const { return matrix_.rows(); }
    const CMatrix& matrix() const { return matrix_; }
    cplx operator()(Eigen::Index r, Eigen::Index c) const { return matrix_(r, c); }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
    double min_eigenvalue() const { return eigenvalues().minCoeff(); }

private:
    CMatrix matrix_;
};

namespace pauli {
inline CMatrix x() { CMatrix m(2, 2); m << 0, 1, 1, 0; return m; }
inline CMatrix y() { CMatrix m(2, 2); m << 0, -kI, kI, 0; return m; }
inline CMatrix z() { CMatrix m(2, 2); m << 1, 0, 0, -1; return m; }
// sigma+ raises |1> (ground) to |0> (excited).
inline CMatrix plus() { CMatrix m(2, 2); m << 0, 1, 0, 0; return m; }
inline CMatrix minus() { CMatrix m(2, 2); m << 0, 0, 1, 0; return m; }
} // namespace pauli

namespace model {

/// Excited-state population 1/(1 + e^{omega/temp}).
inline double excited_population(double omega, double temp) {
    if (temp <= 0.0) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
    const double x = omega / temp;
    return x > 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
}

/// Gibbs state of omega sigma_z / 2 at temperature `temp`.
inline DensityMatrix thermal_state(double omega, double temp) {
    const double pe = excited_population(omega, temp);
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = pe;
    m(1, 1) = 1.0 - pe;
    return DensityMatrix(m);
}

inline DensityMatrix ancilla_state(const ModelParams& p) { return thermal_state(p.omega_a, p.temp_a); }
inline DensityMatrix system_initial_state(const ModelParams& p) { return thermal_state(p.omega_s, p.temp_s); }

/// Rates of the two exchange channels: gamma1 = tr[s- s+ rho_A] (ground
/// population) feeds sigma_S^-, gamma2 = tr[s+ s- rho_A] feeds sigma_S^+.
struct ExchangeRates {
    double gamma1;
    double gamma2;
};

inline ExchangeRates exchange_rates(const DensityMatrix& ancilla) {
    using namespace pauli;
    return {(minus() * plus() * ancilla.matrix()).trace().real(),
            (plus() * minus() * ancilla.matrix()).trace().real()};
}

inline CMatrix system_hamiltonian(const ModelParams& p) { return 0.5 * p.omega_s * pauli::z(); }
inline CMatrix ancilla_hamiltonian(const ModelParams& p) { return 0.5 * p.omega_a * pauli::z(); }

/// Lab-frame drive nu (sigma_x cos(omega t) + sigma_y sin(omega t)).
inline CMatrix drive(const ModelParams& p, double t) {
    return p.nu * (std::cos(p.omega * t) * pauli::x() + std::sin(p.omega * t) * pauli::y());
}

/// Time-independent rotating-frame Hamiltonian (omega_s - omega) sigma_z / 2 + nu sigma_x.
inline CMatrix rotating_hamiltonian(const ModelParams& p) {
    return 0.5 * (p.omega_s - p.omega) * pauli::z() + p.nu * pauli::x();
}

inline CMatrix interaction_hamiltonian(double g1, double g2) {
    using namespace pauli;
    using linalg::kron;
    return g1 * (kron(plus(), minus()) + kron(minus(), plus())) + g2 * kron(z(), z());
}

inline CMatrix interaction_hamiltonian(const ModelParams& p) { return interaction_hamiltonian(p.g1, p.g2); }

/// tr_A[V (1 (x) rho_A)] / sqrt(tau): the first-moment term removed from the
/// interaction so that the stability condition holds.
inline CMatrix shift_hamiltonian(const ModelParams& p, const DensityMatrix& ancilla) {
    if (ancilla.dim() != 2) throw Error(ErrorCode::InvalidArgument, "ancilla must be a qubit");
    const CMatrix weighted = interaction_hamiltonian(p) * linalg::kron(linalg::identity(2), ancilla.matrix());
    return linalg::partial_trace(weighted, {2, 2}, {1}) / std::sqrt(p.tau);
}

inline CMatrix shifted_hamiltonian(const ModelParams& p) {
    return rotating_hamiltonian(p) + shift_hamiltonian(p, ancilla_state(p));
}

inline CMatrix swap_operator() {
    CMatrix s = CMatrix::Zero(4, 4);
    s(0, 0) = s(3, 3) = 1.0;
    s(1, 2) = s(2, 1) = 1.0;
    return s;
}

/// cos(eps) 1 + i sin(eps) SWAP on two ancillas.
inline CMatrix partial_swap(double epsilon) {
    return std::cos(epsilon) * linalg::identity(4) + kI * std::sin(epsilon) * swap_operator();
}

/// Rotating-frame collision generator H~ (x) 1 + 1 (x) H_A + V / sqrt(tau).
inline CMatrix collision_hamiltonian(const ModelParams& p) {
    using linalg::kron;
    return kron(rotating_hamiltonian(p), linalg::identity(2)) +
           kron(linalg::identity(2), ancilla_hamiltonian(p)) +
           interaction_hamiltonian(p) / std::sqrt(p.tau);
}

/// exp(-i chi H_A / 2) on the ancilla factor of S (x) A.
inline CMatrix counting_phase(const ModelParams& p, double chi) {
    return linalg::kron(linalg::identity(2), linalg::unitary_propagator(ancilla_hamiltonian(p), 0.5 * chi));
}

/// Collision unitary over duration `duration`, conjugated by the counting
/// field: e^{-i chi H_A/2} U e^{i chi H_A/2}.
inline CMatrix collision_unitary(const ModelParams& p, double chi, double duration) {
    const CMatrix u = linalg::unitary_propagator(collision_hamiltonian(p), duration);
    if (chi == 0.0) return u;
    const CMatrix phase = counting_phase(p, chi);
    return phase * u * phase.adjoint();
}

inline CMatrix collision_unitary(const ModelParams& p, double chi) { return collision_unitary(p, chi, p.tau); }

/// The pair (U(chi), U(-chi)^dagger) that sandwiches the joint state in the
/// counting-field-dressed collision map.
struct DressedCollision {
    CMatrix forward;
    CMatrix backward;
};

inline DressedCollision dressed_collision(const ModelParams& p, double chi, double duration) {
    return {collision_unitary(p, chi, duration), collision_unitary(p, -chi, duration).adjoint()};
}

inline DressedCollision dressed_collision(const ModelParams& p, double chi) {
    return dressed_collision(p, chi, p.tau);
}

} // namespace model
} // namespace ctur
