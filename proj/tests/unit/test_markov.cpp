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
#include <vector>

#include "ctur/markov.hpp"
#include "oracles/oracles.hpp"
#include "support/params.hpp"

using namespace ctur;
using ctur::testing::Rng;

namespace {

oracle::Physical physical(const ModelParams& p) {
    return {p.omega_s, p.omega_a, p.omega, p.nu, p.g1, p.g2, p.temp_s, p.temp_a, p.tau};
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

bool has_code(const std::function<void()>& f, ErrorCode code) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

} // namespace

TEST_CASE("build_liouvillian against the direct GKSL action", "[markov][oracle]") {
    Rng rng(61);
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = testing::random_markov_params(rng);
        for (double chi : {0.0, 0.3, -0.7}) {
            CHECK(max_abs(markov::build_liouvillian(p, chi).matrix - oracle::gksl(physical(p), chi)) < 1e-10);
        }
    }
}

TEST_CASE("build_liouvillian edge cases", "[markov]") {
    ModelParams p;
    p.g1 = p.g2 = p.nu = 0.0;
    p.omega = p.omega_s;
    CHECK(max_abs(markov::build_liouvillian(p, 0.4).matrix) == 0.0);

    const ModelParams q = testing::markov_reference();
    const CVector dual = linalg::vec(linalg::identity(2));
    CHECK((dual.adjoint() * markov::build_liouvillian(q, 0.0).matrix).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("closed-form Liouvillian", "[markov]") {
    const ModelParams p = testing::markov_reference();
    for (double chi : {0.0, 0.3, -0.7}) {
        CHECK(max_abs(markov::build_liouvillian(p, chi).matrix - markov::closed_form_liouvillian(p, chi).matrix) <
              1e-10);
    }

    ModelParams hot = p;
    hot.temp_a = 1e9;
    const CMatrix l = markov::closed_form_liouvillian(hot, 0.0).matrix;
    CHECK(std::abs(l(0, 3) - l(3, 0)) < 1e-9);

    ModelParams res = p;
    res.g2 = 0.0;
    CHECK(markov::closed_form_rates(res).delta == 0.0);
}

TEST_CASE("generic and closed-form generators agree on a parameter grid", "[markov][property]") {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        for (int k = 0; k < 10; ++k) {
            for (double chi : {-1.0, -0.3, 0.0, 0.25, 0.8}) {
                ModelParams p = testing::markov_reference(0.02 + 0.98 * i / 9.0);
                p.g2 = 1e-3 * k / 9.0;
                worst = std::max(worst, max_abs(markov::build_liouvillian(p, chi).matrix -
                                                markov::closed_form_liouvillian(p, chi).matrix));
            }
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("steady states", "[markov]") {
    SECTION("undriven limit is the ancilla Gibbs state") {
        ModelParams p = testing::markov_reference();
        p.nu = 0.0;
        const auto rho = markov::steady_state_analytic(p);
        const double e = std::exp(p.omega_a / p.temp_a);
        CHECK(std::abs(rho(1, 1).real() - e / (1 + e)) < 1e-14);
        CHECK(std::abs(rho(0, 1)) == 0.0);
    }
    SECTION("reference point agrees with the kernel") {
        const ModelParams p = testing::markov_reference();
        const CVector v = linalg::null_vector(markov::build_liouvillian(p, 0.0).matrix);
        CMatrix kernel = linalg::unvec(v);
        kernel /= kernel.trace();
        CHECK(max_abs(kernel - markov::steady_state_analytic(p).matrix()) < 1e-9);
        const auto c = linalg::char_poly_coeffs(markov::build_liouvillian(p, 0.0).matrix);
        CHECK(std::abs(c[0]) < 1e-15);
    }
    SECTION("random draws") {
        Rng rng(67);
        for (int i = 0; i < 200; ++i) {
            const ModelParams p = testing::random_markov_params(rng);
            const auto a = markov::steady_state_analytic(p);
            CHECK(max_abs(a.matrix() - markov::steady_state_numeric(p).matrix()) < 1e-9);
            CHECK(std::abs(a(0, 1) - std::conj(a(1, 0))) < 1e-15);
        }
    }
    SECTION("no unique steady state") {
        ModelParams p = testing::markov_reference();
        p.g1 = 0.0;
        p.nu = 0.0;
        CHECK(has_code([&] { markov::steady_state_analytic(p); }, ErrorCode::NoUniqueSteadyState));
    }
}

TEST_CASE("entropy flux and production", "[markov]") {
    const ModelParams p = testing::markov_reference();
    CHECK(entropy_flux(p, CMatrix::Zero(2, 2)) == 0.0);

    ModelParams undriven = p;
    undriven.nu = 0.0;
    const auto eq = markov::steady_state_analytic(undriven);
    CHECK(std::abs(markov::steady_entropy_production(undriven, eq)) < 1e-15);

    const auto ss = markov::steady_state_analytic(p);
    const CMatrix d = markov::dissipator_action(p, ss.matrix());
    CHECK(entropy_production_rate(p, ss, ss, d, 0.1) == entropy_flux(p, d));
    CHECK(entropy_flux(p, d) >= 0.0);

    const DensityMatrix mixed(0.5 * linalg::identity(2));
    CHECK(entropy_production_rate(p, mixed, mixed, CMatrix::Zero(2, 2), 1.0) == 0.0);

    // The flux is the system share of the heat current divided by T_A.
    const auto stats = markov::ness_cumulants(p);
    CHECK(std::abs(entropy_flux(p, d) + (p.omega_s / p.omega_a) * stats.mean / p.temp_a) <
          1e-6 * std::abs(entropy_flux(p, d)));
}

TEST_CASE("characteristic-polynomial cumulants", "[markov]") {
    SECTION("closed-form coefficients") {
        for (double g1 : {0.05, 0.2, 0.45, 0.9}) {
            const ModelParams p = testing::markov_reference(g1);
            const auto d = markov::char_poly_derivatives(p);
            const auto cf = markov::closed_form_coefficients(p);
            auto rel = [](cplx a, double b) { return std::abs(a - b) / std::abs(b); };
            CHECK(rel(d.first(0), cf.a0_first) < 1e-7);
            CHECK(rel(d.second(0), cf.a0_second) < 1e-7);
            CHECK(rel(d.value(1), cf.a1) < 1e-7);
            CHECK(rel(d.first(1), cf.a1_first) < 1e-7);
            CHECK(rel(d.value(2), cf.a2) < 1e-7);
            const auto s = markov::ness_cumulants(p);
            CHECK(std::abs(s.variance / (s.mean * s.mean) - markov::closed_form_fano_ratio(p)) <
                  1e-6 * markov::closed_form_fano_ratio(p));
        }
    }
    SECTION("spectral route") {
        const ModelParams p = testing::markov_reference();
        const auto a = markov::ness_cumulants(p);
        const auto b = markov::ness_cumulants_spectral(p);
        CHECK(std::abs(a.mean - b.mean) < 1e-7 * std::abs(a.mean));
        CHECK(std::abs(a.variance - b.variance) < 1e-6 * a.variance);
        CHECK(a.regime == Regime::NessScaled);
        CHECK_FALSE(a.time.has_value());
    }
    SECTION("degenerate couplings") {
        ModelParams p = testing::markov_reference();
        p.nu = 0.0;
        CHECK(std::abs(markov::ness_cumulants(p).mean) < 1e-12);
        p = testing::markov_reference(0.0);
        const auto s = markov::ness_cumulants(p);
        CHECK(std::abs(s.mean) < 1e-12);
        CHECK(std::abs(s.variance) < 1e-12);
        CHECK(has_code([&] { markov::q_cl(p); }, ErrorCode::ZeroMeanCurrent));
    }
    SECTION("Q_cl independent of tau and of the stacking order") {
        const ModelParams p = testing::markov_reference();
        ModelParams q = p;
        q.tau = 1e-3;
        q.g2 = p.g2 * std::sqrt(q.tau / p.tau); // same shift
        CHECK(std::abs(markov::q_cl(p).q - markov::q_cl(q).q) < 1e-4 * markov::q_cl(p).q);

        // Row stacking is the transpose permutation; the spectrum, hence the
        // characteristic polynomial, is unchanged.
        CMatrix perm = CMatrix::Zero(4, 4);
        perm(0, 0) = perm(1, 2) = perm(2, 1) = perm(3, 3) = 1.0;
        for (double chi : {0.0, 0.2}) {
            const CMatrix l = markov::build_liouvillian(p, chi).matrix;
            const auto a = linalg::char_poly_coeffs(l);
            const auto b = linalg::char_poly_coeffs(perm * l * perm);
            for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
        }
    }
}

TEST_CASE("finite-time cumulants", "[markov]") {
    const ModelParams p = testing::markov_reference();
    const auto rho0 = model::system_initial_state(p);

    const auto tiny = markov::finite_time_cumulants(p, rho0, 1e-9);
    CHECK(std::abs(tiny.mean) < 1e-9);
    CHECK(std::abs(tiny.variance) < 1e-9);
    CHECK(*tiny.time == 1e-9);

    const auto ness = markov::ness_cumulants(p);
    const auto late = markov::finite_time_cumulants(p, rho0, 1000.0);
    CHECK(std::abs(late.mean / 1000.0 - ness.mean) < 0.01 * std::abs(ness.mean));
    CHECK(std::abs(late.variance / 1000.0 - ness.variance) < 0.01 * ness.variance);

    ModelParams undriven = p;
    undriven.nu = 0.0;
    const auto eq = markov::steady_state_analytic(undriven);
    for (double t : {1.0, 10.0, 100.0}) CHECK(std::abs(markov::finite_time_cumulants(undriven, eq, t).mean) < 1e-10);

    CHECK_THROWS_AS(markov::finite_time_cumulants(p, rho0, 0.0), Error);
}

TEST_CASE("finite-time mean approaches the NESS rate as 1/t", "[markov][property]") {
    const ModelParams p = testing::markov_reference(0.2);
    const auto rho0 = model::system_initial_state(p);
    const double j = markov::ness_cumulants(p).mean;
    std::vector<double> lt, le;
    for (double t : {1000.0, 2000.0, 4000.0, 8000.0}) {
        const auto s = markov::finite_time_cumulants(p, rho0, t);
        lt.push_back(std::log(t));
        le.push_back(std::log(std::abs(s.mean / t - j)));
    }
    const double slope = (le.back() - le.front()) / (lt.back() - lt.front());
    CHECK(std::abs(slope + 1.0) < 0.05);
}

TEST_CASE("TUR ratios", "[markov]") {
    const ModelParams p = testing::markov_reference();
    const auto r = markov::q_cl(p);
    CHECK(r.q > 0.0);
    CHECK(r.violates());
    CHECK(r.bound == 2.0);

    ModelParams lin = p;
    lin.nu = 1e-3;
    CHECK(markov::q_cl(lin).q >= 2.0);

    const auto rho0 = model::system_initial_state(p);
    const auto ft = markov::q_cl_ft(p, rho0, 500.0);
    CHECK(ft.regime == Regime::FiniteTime);
    CHECK(std::abs(ft.entropy_production - r.entropy_production * 500.0) < 1e-12);

    const auto integ = markov::q_cl_ft(p, rho0, 500.0, EntropyVariant::IntegratedSigma);
    CHECK(integ.variant == EntropyVariant::IntegratedSigma);
    // Accumulated entropy approaches rate x t up to a bounded transient.
    CHECK(std::abs(integ.entropy_production - ft.entropy_production) < 0.05 * ft.entropy_production);
}

TEST_CASE("integrated entropy production matches quadrature", "[markov][oracle]") {
    const ModelParams p = testing::markov_reference(0.6);
    const auto rho0 = model::system_initial_state(p);
    const double t = 20.0;
    const int n = 4000;
    const CMatrix step = linalg::expm(markov::build_liouvillian(p, 0.0).matrix, t / n);
    CVector v = linalg::vec(rho0.matrix());
    double flux = 0.0;
    auto j = [&](const CVector& x) { return entropy_flux(p, markov::dissipator_action(p, linalg::unvec(x))); };
    double prev = j(v);
    for (int k = 0; k < n; ++k) {
        v = step * v;
        const double cur = j(v);
        flux += 0.5 * (prev + cur) * t / n;
        prev = cur;
    }
    const double expected =
        von_neumann_entropy(DensityMatrix(linalg::unvec(v))) - von_neumann_entropy(rho0) + flux;
    CHECK(std::abs(markov::integrated_entropy_production(p, rho0, t) - expected) < 1e-6 * std::abs(expected) + 1e-10);
    CHECK(max_abs(markov::evolve(p, rho0, t).matrix() - linalg::unvec(v)) < 1e-10);
}
