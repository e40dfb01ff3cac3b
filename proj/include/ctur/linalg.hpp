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

// Dense complex kernel shared by every module. Superoperators use
// column-stacking: |i><j| -> e_j (x) e_i, so A rho B -> (B^T (x) A) |rho>>.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ctur/error.hpp"

namespace ctur {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

namespace linalg {

/// Relative singular-value threshold below which a direction counts as kernel.
inline constexpr double kKernelTolerance = 1e-9;

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline CMatrix kron(std::initializer_list<CMatrix> factors) {
    CMatrix out = CMatrix::Ones(1, 1);
    for (const auto& f : factors) out = kron(out, f);
    return out;
}

inline double hermiticity_defect(const CMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& m, double tol = 1e-12) {
    return m.rows() == m.cols() && hermiticity_defect(m) < tol;
}

inline void require_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + ": matrix is not square");
    }
}

/// exp(scale * a) by scaling-and-squaring Pade (Eigen MatrixFunctions).
inline CMatrix expm(const CMatrix& a, double scale = 1.0) {
    require_square(a, "expm");
    if (!std::isfinite(scale)) throw Error(ErrorCode::InvalidArgument, "expm: non-finite scale");
    const CMatrix scaled = scale * a;
    return scaled.exp();
}

/// exp(-i h t) for Hermitian h via its eigendecomposition; unitary to
/// machine precision regardless of |h t|.
inline CMatrix unitary_propagator(const CMatrix& h, double t) {
    require_square(h, "unitary_propagator");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    const CVector phases = (-kI * t * es.eigenvalues().cast<cplx>()).array().exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline CVector vec(const CMatrix& m) {
    return Eigen::Map<const CVector>(m.data(), m.size());
}

inline CMatrix unvec(const CVector& v) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (n * n != v.size()) throw Error(ErrorCode::InvalidArgument, "unvec: length is not a square");
    return Eigen::Map<const CMatrix>(v.data(), n, n);
}

/// Row-stacking counterpart of vec, used only to cross-check conventions.
inline CVector vec_rows(const CMatrix& m) {
    CMatrix t = m.transpose();
    return vec(t);
}

/// Superoperator of rho -> a rho b in column-stacking.
inline CMatrix sandwich(const CMatrix& a, const CMatrix& b) { return kron(b.transpose(), a); }

/// Unit-norm spanning vector of a one-dimensional kernel.
inline CVector null_vector(const CMatrix& a) {
    require_square(a, "null_vector");
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    int small = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= kKernelTolerance * smax) ++small;
    }
    if (smax == 0.0 || small != 1) {
        throw Error(ErrorCode::DegenerateKernel,
                    "kernel dimension is " + std::to_string(smax == 0.0 ? sv.size() : small) +
                        ", expected 1");
    }
    CVector v = svd.matrixV().col(sv.size() - 1);
    return v / v.norm();
}

/// Coefficients c_0..c_n of det(lambda I - a) = sum_k c_k lambda^k (c_n = 1),
/// by the Faddeev-LeVerrier recursion. Polynomial in the entries of `a`, so the
/// coefficients inherit any smooth parameter dependence exactly.
inline std::vector<cplx> char_poly_coeffs(const CMatrix& a) {
    require_square(a, "char_poly_coeffs");
    const auto n = a.rows();
    std::vector<cplx> c(static_cast<std::size_t>(n) + 1);
    c[static_cast<std::size_t>(n)] = 1.0;
    CMatrix m = CMatrix::Zero(n, n);
    const CMatrix id = identity(n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + c[static_cast<std::size_t>(n - k + 1)] * id;
        c[static_cast<std::size_t>(n - k)] = -(a * m).trace() / static_cast<double>(k);
    }
    return c;
}

inline cplx poly_eval(std::span<const cplx> coeffs, cplx x) {
    cplx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

/// Drazin (group) inverse of a generator with simple zero eigenvalue:
/// L^D = Q (Q L Q + P)^{-1} Q with P = |steady>><<dual| and Q = 1 - P.
/// `identity_dual` is the left null vector, normalised so <<dual|steady>> = 1.
inline CMatrix drazin_inverse(const CMatrix& l, const CVector& steady, const CVector& identity_dual) {
    require_square(l, "drazin_inverse");
    const auto n = l.rows();
    if (steady.size() != n || identity_dual.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "drazin_inverse: vector size mismatch");
    }
    const cplx overlap = identity_dual.dot(steady);
    if (std::abs(overlap - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "drazin_inverse: <<dual|steady>> must equal 1");
    }
    const CMatrix p = steady * identity_dual.adjoint();
    const CMatrix q = identity(n) - p;
    const CMatrix core = q * l * q + p;
    Eigen::JacobiSVD<CMatrix> svd(core);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= kKernelTolerance * sv(0)) {
        throw Error(ErrorCode::DegenerateKernel, "drazin_inverse: zero eigenvalue is not simple");
    }
    return q * core.fullPivLu().inverse() * q;
}

/// Partial trace of an operator on a tensor product with local dimensions
/// `dims`; `traced` lists the subsystem indices to remove.
inline CMatrix partial_trace(const CMatrix& m, std::span<const int> dims, std::span<const int> traced) {
    const int nsub = static_cast<int>(dims.size());
    std::vector<bool> drop(static_cast<std::size_t>(nsub), false);
    for (int t : traced) drop.at(static_cast<std::size_t>(t)) = true;
    int total = 1, kept = 1;
    for (int s = 0; s < nsub; ++s) {
        total *= dims[static_cast<std::size_t>(s)];
        if (!drop[static_cast<std::size_t>(s)]) kept *= dims[static_cast<std::size_t>(s)];
    }
    if (m.rows() != total || m.cols() != total) {
        throw Error(ErrorCode::InvalidArgument, "partial_trace: dimension mismatch");
    }
    // Split a flat index into (kept index, traced index), row-major over subsystems.
    std::vector<int> kept_of(static_cast<std::size_t>(total)), traced_of(static_cast<std::size_t>(total));
    for (int idx = 0; idx < total; ++idx) {
        int rem = idx, k = 0, t = 0, kstride = 1, tstride = 1;
        for (int s = nsub - 1; s >= 0; --s) {
            const int d = dims[static_cast<std::size_t>(s)];
            const int digit = rem % d;
            rem /= d;
            if (drop[static_cast<std::size_t>(s)]) {
                t += digit * tstride;
                tstride *= d;
            } else {
                k += digit * kstride;
                kstride *= d;
            }
        }
        kept_of[static_cast<std::size_t>(idx)] = k;
        traced_of[static_cast<std::size_t>(idx)] = t;
    }
    CMatrix out = CMatrix::Zero(kept, kept);
    for (int r = 0; r < total; ++r) {
        for (int c = 0; c < total; ++c) {
            if (traced_of[static_cast<std::size_t>(r)] == traced_of[static_cast<std::size_t>(c)]) {
                out(kept_of[static_cast<std::size_t>(r)], kept_of[static_cast<std::size_t>(c)]) += m(r, c);
            }
        }
    }
    return out;
}

inline CMatrix partial_trace(const CMatrix& m, std::initializer_list<int> dims, std::initializer_list<int> traced) {
    return partial_trace(m, std::span<const int>(dims.begin(), dims.size()),
                         std::span<const int>(traced.begin(), traced.size()));
}

inline double trace_norm(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues().sum();
}

inline double spectral_norm(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

} // namespace linalg
} // namespace ctur
