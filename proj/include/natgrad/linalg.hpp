// Copyright 2026 The natgrad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "natgrad/errors.hpp"

namespace natgrad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default pseudoinverse cutoff on eigenvalues.
inline constexpr double kDefaultPinvCutoff = 1e-4;

/// A = Q diag(eigenvalues) Q^T with eigenvalues in descending order.
struct SpectralDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

namespace detail {

inline void require_square(const Matrix &a, const char *what) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + ": matrix is not square");
    }
}

}  // namespace detail

/// Eigendecomposition of the symmetric part (A + A^T)/2.
inline SpectralDecomposition eigh(const Matrix &a) {
    detail::require_square(a, "eigh");
    if (!a.allFinite()) {
        throw std::invalid_argument("eigh: matrix has non-finite entries");
    }
    const Matrix sym = 0.5 * (a + a.transpose());
    if (sym.rows() == 0) {
        return {Vector(0), Matrix(0, 0)};
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigh: eigensolver did not converge");
    }
    // Eigen sorts ascending.
    return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

inline double min_eigenvalue(const Matrix &a) {
    const auto d = eigh(a);
    return d.eigenvalues.size() == 0 ? 0.0 : d.eigenvalues(d.eigenvalues.size() - 1);
}

/// sum over eigenvalues > cutoff of v v^T / lambda, from a precomputed decomposition.
inline Matrix pinv_from_spectrum(const SpectralDecomposition &d, double cutoff) {
    const auto m = d.eigenvalues.size();
    Matrix out = Matrix::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double lambda = d.eigenvalues(k);
        if (lambda > cutoff) {
            out.noalias() += (1.0 / lambda) * d.eigenvectors.col(k) * d.eigenvectors.col(k).transpose();
        }
    }
    return out;
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix, dropping eigenvalues <= cutoff.
inline Matrix pinv_cutoff(const Matrix &a, double cutoff = kDefaultPinvCutoff) {
    if (!(cutoff > 0.0)) {
        throw std::invalid_argument("pinv_cutoff: cutoff must be positive");
    }
    const auto d = eigh(a);
    if (d.eigenvalues.size() > 0) {
        const double floor = -1e-8 * std::max(1.0, std::abs(d.eigenvalues(0)));
        if (d.eigenvalues(d.eigenvalues.size() - 1) < floor) {
            throw std::invalid_argument("pinv_cutoff: matrix is not positive semidefinite");
        }
    }
    return pinv_from_spectrum(d, cutoff);
}

/// Default rank tolerance 1e-8 * max(1, lambda_max).
inline double default_rank_tol(const SpectralDecomposition &d) {
    return 1e-8 * std::max(1.0, d.eigenvalues.size() > 0 ? d.eigenvalues(0) : 0.0);
}

/// Number of eigenvalues above `tol`; a negative tol selects default_rank_tol.
inline int rank_tol(const Matrix &a, double tol = -1.0) {
    const auto d = eigh(a);
    const double t = tol > 0.0 ? tol : default_rank_tol(d);
    return static_cast<int>((d.eigenvalues.array() > t).count());
}

inline bool is_psd(const Matrix &a, double tol = 1e-8) { return min_eigenvalue(a) >= -tol; }

}  // namespace natgrad
