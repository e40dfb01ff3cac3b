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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "ctur/qtur.hpp"
#include "oracles/oracles.hpp"
#include "support/params.hpp"

using namespace ctur;
using ctur::testing::Rng;

namespace {
double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }
} // namespace

TEST_CASE("dynamical activity", "[qtur]") {
    ModelParams p = testing::markov_reference();
    p.g1 = p.g2 = 0.0;
    Rng rng(71);
    const auto rho = testing::random_state(rng, 2);
    CHECK(qtur::dynamical_activity(qtur::jump_operators(p), rho) == 0.0);

    p.g2 = 0.3;
    CHECK(std::abs(qtur::dynamical_activity(qtur::jump_operators(p), rho) - 0.09) < 1e-15);

    const ModelParams q = testing::markov_reference();
    CHECK(qtur::dynamical_activity(qtur::jump_operators(q), markov::steady_state_numeric(q)) > 0.0);
}

TEST_CASE("left and right generators", "[qtur]") {
    Rng rng(73);
    const CVector dual = linalg::vec(linalg::identity(2));
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = testing::random_markov_params(rng);
        const auto s = qtur::left_right_liouvillians(p);
        CHECK(max_abs(s.left + s.right - markov::build_liouvillian(p, 0.0).matrix) < 1e-10);
        CHECK((dual.adjoint() * (s.left + s.right)).cwiseAbs().maxCoeff() < 1e-10);
    }
    ModelParams idle;
    idle.g1 = idle.g2 = idle.nu = 0.0;
    idle.omega = idle.omega_s;
    const auto s = qtur::left_right_liouvillians(idle);
    CHECK(max_abs(s.left) == 0.0);
    CHECK(max_abs(s.right) == 0.0);
}

TEST_CASE("left and right generators act from the stated sides", "[qtur]") {
    // Right part: -i H rho + (1/2) A rho A^dag - (1/2) A^dag A rho. Left part mirrors it.
    const ModelParams p = testing::markov_reference();
    const auto s = qtur::left_right_liouvillians(p);
    const CMatrix h = model::shifted_hamiltonian(p);
    const auto jumps = qtur::jump_operators(p);
    const CMatrix right = oracle::superoperator(2, [&](const CMatrix& rho) {
        CMatrix out = -kI * h * rho;
        for (const auto& a : jumps) out += 0.5 * a * rho * a.adjoint() - 0.5 * a.adjoint() * a * rho;
        return out;
    });
    CHECK(max_abs(s.right - right) < 1e-12);
}

TEST_CASE("Drazin inverse of the generator", "[qtur][oracle]") {
    Rng rng(79);
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = testing::random_markov_params(rng);
        const CMatrix l = markov::build_liouvillian(p, 0.0).matrix;
        const CVector steady = linalg::vec(markov::steady_state_numeric(p).matrix());
        const CVector dual = linalg::vec(linalg::identity(2));
        const CMatrix ld = linalg::drazin_inverse(l, steady, dual);
        const double scale = std::max(1.0, max_abs(ld));
        CHECK(max_abs(ld - oracle::drazin_by_resolvent(l, steady, dual)) < 1e-8 * scale);
        CHECK(max_abs(l * ld * l - l) < 1e-9 * scale);
        CHECK(max_abs(ld * l * ld - ld) < 1e-9 * scale * scale);
        CHECK(max_abs(l * ld - ld * l) < 1e-9 * scale);
    }
}

TEST_CASE("quantum TUR", "[qtur]") {
    SECTION("reference point") {
        const ModelParams p = testing::markov_reference();
        const auto q = qtur::q_quantum(p);
        CHECK(q.upsilon > 0.0);
        CHECK(q.q_q > 0.0);
        CHECK(q.q_q <= markov::q_cl(p).q);
        CHECK(std::abs(q.sigma - markov::q_cl(p).entropy_production) < 1e-9 * q.sigma);
    }
    SECTION("vanishing drive") {
        ModelParams p = testing::markov_reference();
        double prev = 1e300;
        for (double nu : {1e-1, 1e-2, 1e-3, 1e-4}) {
            p.nu = nu;
            const double qq = qtur::q_quantum(p).q_q;
            CHECK(qq < prev);
            prev = qq;
        }
        CHECK(prev < 1e-5);
    }
    SECTION("bound holds on random draws") {
        Rng rng(83);
        for (int i = 0; i < 50; ++i) {
            const ModelParams p = testing::random_markov_params(rng);
            CHECK(qtur::q_quantum(p).q_q <= markov::q_cl(p).q);
        }
    }
}
