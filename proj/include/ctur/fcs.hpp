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

// Counting-field differentiation shared by the Markovian and collisional
// cumulant routines. Derivatives are taken as (-i d/dchi)^k at chi = 0.

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "ctur/linalg.hpp"

namespace ctur::fcs {

/// Step is h = 1e-3 / omega_A; the generator is entire in chi.
inline double default_step(double omega_a) { return 1e-3 / std::abs(omega_a == 0.0 ? 1.0 : omega_a); }

/// `requested` when positive, otherwise default_step(omega_a).
inline double resolve_step(double requested, double omega_a) {
    return requested > 0.0 ? requested : default_step(omega_a);
}

/// Agreement required between step h and h/2.
inline constexpr double kRichardsonTolerance = 1e-6;

/// Offsets (in units of h) of every chi at which the function is sampled:
/// the 5-point stencil at h and the one at h/2 share -h, 0, h.
inline constexpr std::array<double, 7> kStencilOffsets = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};

inline std::array<double, 7> stencil_points(double h) {
    std::array<double, 7> out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = kStencilOffsets[i] * h;
    return out;
}

struct Derivatives {
    CVector value;
    CVector first;  // (-i d/dchi) f
    CVector second; // (-i d/dchi)^2 f
};

namespace detail {

struct Raw {
    CVector d1;
    CVector d2;
};

inline Raw five_point(const CVector& m2, const CVector& m1, const CVector& c, const CVector& p1,
                      const CVector& p2, double h) {
    return {(m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
            (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)};
}

inline void require_agreement(const CVector& coarse, const CVector& fine, double roundoff, const char* what) {
    for (Eigen::Index i = 0; i < coarse.size(); ++i) {
        const double scale = std::max(std::abs(coarse(i)), std::abs(fine(i)));
        const double diff = std::abs(coarse(i) - fine(i));
        if (diff > kRichardsonTolerance * scale + roundoff) {
            throw Error(ErrorCode::NumericalBreakdown,
                        std::string("counting-field ") + what + " derivative fails the half-step check");
        }
    }
}

} // namespace detail

/// Differentiate from samples on `stencil_points(h)`. Throws
/// NumericalBreakdown when the h and h/2 stencils disagree beyond
/// kRichardsonTolerance plus the round-off amplification of `sample_error`
/// (absolute error of each sample; never taken below eps * max|f|).
inline Derivatives differentiate_samples(const std::array<CVector, 7>& s, double h, double sample_error = 0.0) {
    // s: -2h, -h, -h/2, 0, h/2, h, 2h
    const auto coarse = detail::five_point(s[0], s[1], s[3], s[5], s[6], h);
    const auto fine = detail::five_point(s[1], s[2], s[3], s[4], s[5], 0.5 * h);

    double fmax = 0.0;
    for (const auto& v : s) fmax = std::max(fmax, v.cwiseAbs().maxCoeff());
    const double err = std::max(sample_error, std::numeric_limits<double>::epsilon() * fmax);
    detail::require_agreement(coarse.d1, fine.d1, 8.0 * err / (0.5 * h), "first");
    detail::require_agreement(coarse.d2, fine.d2, 32.0 * err / (0.25 * h * h), "second");

    // (-i d)^1 = -i f',  (-i d)^2 = -f''
    return {s[3], -kI * coarse.d1, -coarse.d2};
}

inline Derivatives differentiate(const std::function<CVector(double)>& f, double h, double sample_error = 0.0) {
    std::array<CVector, 7> samples;
    const auto chis = stencil_points(h);
    for (std::size_t i = 0; i < chis.size(); ++i) samples[i] = f(chis[i]);
    return differentiate_samples(samples, h, sample_error);
}

/// Mean and variance from samples of M(chi) on the stencil: cumulants of
/// ln M. Imaginary parts are returned so callers can assert realness.
/// `relative_error` bounds the relative error of each M sample; the
/// *_roundoff fields carry its amplification through the stencil.
struct Cumulants {
    cplx mean;
    cplx variance;
    double mean_roundoff = 0.0;
    double variance_roundoff = 0.0;
};

inline Cumulants cumulants_from_mgf(const std::array<cplx, 7>& mgf, double h, double relative_error = 0.0) {
    std::array<CVector, 7> logs;
    for (std::size_t i = 0; i < mgf.size(); ++i) {
        if (mgf[i] == cplx(0.0)) throw Error(ErrorCode::NumericalBreakdown, "moment generating function vanished");
        logs[i] = CVector::Constant(1, std::log(mgf[i]));
    }
    const double floor = std::max(relative_error, std::numeric_limits<double>::epsilon());
    const auto d = differentiate_samples(logs, h, floor);
    return {d.first(0), d.second(0), 8.0 * floor / (0.5 * h), 32.0 * floor / (0.25 * h * h)};
}

} // namespace ctur::fcs
