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

// Quantum TUR bound Q_q = sigma / (Upsilon + Psi) for the Markovian NESS.

#include <utility>
#include <vector>

#include "ctur/markov.hpp"

namespace ctur {

struct QTURComponents {
    double upsilon = 0.0; // dynamical activity
    double psi = 0.0;     // coherent contribution
    double sigma = 0.0;   // NESS entropy production rate
    double q_q = 0.0;
};

namespace qtur {

inline std::vector<CMatrix> jump_operators(const ModelParams& p) {
    std::vector<CMatrix> out;
    for (auto& ch : markov::jump_channels(p)) out.push_back(std::move(ch.op));
    return out;
}

/// Sum of tr(A^dagger A rho_ss) over the jump set.
inline double dynamical_activity(const std::vector<CMatrix>& jumps, const DensityMatrix& rho_ss) {
    double total = 0.0;
    for (const auto& a : jumps) total += (a.adjoint() * a * rho_ss.matrix()).trace().real();
    return total;
}

struct SplitLiouvillian {
    CMatrix right; // acts from the left on rho: -i 1(x)H + ...
    CMatrix left;  // acts from the right on rho: i H^T(x)1 + ...
};

/// Left/right split of the chi = 0 generator with H = shifted rotating-frame
/// Hamiltonian; right + left reproduces the full generator.
inline SplitLiouvillian left_right_liouvillians(const ModelParams& p) {
    const CMatrix h = model::shifted_hamiltonian(p);
    const CMatrix id = linalg::identity(2);
    CMatrix right = -kI * linalg::kron(id, h);
    CMatrix left = kI * linalg::kron(h.transpose(), id);
    for (const auto& a : jump_operators(p)) {
        const CMatrix jump = linalg::kron(a.conjugate(), a);
        const CMatrix ada = a.adjoint() * a;
        right += 0.5 * (jump - linalg::kron(id, ada));
        left += 0.5 * (jump - linalg::kron(ada.transpose(), id));
    }
    return {right, left};
}

inline QTURComponents q_quantum(const ModelParams& p) {
    const DensityMatrix rho_ss = markov::steady_state_numeric(p);
    const CMatrix l = markov::build_liouvillian(p, 0.0).matrix;
    const auto split = left_right_liouvillians(p);

    const CVector steady = linalg::vec(rho_ss.matrix());
    const CVector dual = linalg::vec(linalg::identity(2));
    const CMatrix drazin = linalg::drazin_inverse(l, steady, dual);

    const cplx psi_c = -4.0 * (dual.dot(split.left * drazin * split.right * steady) +
                               dual.dot(split.right * drazin * split.left * steady));
    if (std::abs(psi_c.imag()) > 1e-8 * std::max(1.0, std::abs(psi_c.real()))) {
        throw Error(ErrorCode::NumericalBreakdown, "Psi has a non-negligible imaginary part");
    }

    QTURComponents out;
    out.upsilon = dynamical_activity(jump_operators(p), rho_ss);
    out.psi = psi_c.real();
    out.sigma = markov::steady_entropy_production(p, rho_ss);
    const double denom = out.upsilon + out.psi;
    if (!(denom > 0.0)) throw Error(ErrorCode::NumericalBreakdown, "Upsilon + Psi is not positive");
    out.q_q = out.sigma / denom;
    return out;
}

} // namespace qtur
} // namespace ctur
