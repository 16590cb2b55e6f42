// fock.hpp — truncated Fock-space operators and oscillator eigenfunctions
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "decolab/core.hpp"
#include "decolab/params.hpp"

namespace decolab::fock {

// Truncated ladder operators of the omega0 oscillator. H0 is diagonal with
// entries hbar*omega0*k (no zero-point term), so the identity
// H0 = (hbar^2/2) L^dag L holds exactly on the truncated space, with
// L = sqrt(2 omega0 / hbar) * a.
struct FockOperators {
    std::size_t dim = 0;
    Eigen::MatrixXcd H0;
    Eigen::MatrixXcd lower;
    Eigen::MatrixXcd L;
};

inline FockOperators build_operators(std::size_t dim, const ModelParams& params) {
    if (dim < 2) throw std::invalid_argument("build_operators: dim must be >= 2");
    params.validate();
    FockOperators ops;
    ops.dim = dim;
    const auto d = static_cast<Eigen::Index>(dim);
    ops.H0 = Eigen::MatrixXcd::Zero(d, d);
    ops.lower = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
        ops.H0(k, k) = params.hbar * params.omega0 * static_cast<double>(k);
    for (Eigen::Index k = 1; k < d; ++k)
        ops.lower(k - 1, k) = std::sqrt(static_cast<double>(k));
    ops.L = std::sqrt(2.0 * params.omega0 / params.hbar) * ops.lower;
    return ops;
}

// Normalized oscillator eigenfunctions phi_p on an arbitrary position grid,
// exp(-omega0 X^2 / 2 hbar) * H_p up to normalization. Evaluated by the
// three-term recurrence on the Gaussian-weighted (bounded) form and
// L2-normalized with trapezoid weights on the given grid.
inline Eigen::VectorXcd eigenstate_wavefunction(std::size_t p, std::span<const double> X,
                                                const ModelParams& params) {
    if (X.empty()) throw std::invalid_argument("eigenstate_wavefunction: empty grid");
    params.validate();
    const auto n = static_cast<Eigen::Index>(X.size());
    const double s = std::sqrt(params.omega0 / params.hbar);

    Eigen::VectorXd prev2(n), prev(n), cur(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double y = s * X[static_cast<std::size_t>(i)];
        prev(i) = std::exp(-0.5 * y * y);
        if (p >= 1) cur(i) = std::sqrt(2.0) * y * prev(i);
    }
    if (p == 0) cur = prev;
    for (std::size_t k = 1; k < p; ++k) {
        prev2 = prev;
        prev = cur;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double y = s * X[static_cast<std::size_t>(i)];
            cur(i) = std::sqrt(2.0 / (k + 1.0)) * y * prev(i)
                     - std::sqrt(k / (k + 1.0)) * prev2(i);
        }
    }

    double norm2 = 0.0;
    if (n == 1) {
        norm2 = cur(0) * cur(0);
    } else {
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            const double h = X[static_cast<std::size_t>(i + 1)] - X[static_cast<std::size_t>(i)];
            norm2 += 0.5 * h * (cur(i) * cur(i) + cur(i + 1) * cur(i + 1));
        }
    }
    if (!(norm2 > 0.0))
        throw std::invalid_argument("eigenstate_wavefunction: grid does not support the state");
    return (cur / std::sqrt(norm2)).cast<Complex>();
}

// Run f at dim and dim+4 and report the difference; the documented convention
// for certifying truncation-independence of Fock-space results.
template <typename Fn>
double truncation_check(Fn&& f, std::size_t dim) {
    const double a = f(dim);
    const double b = f(dim + 4);
    return std::abs(a - b);
}

} // namespace decolab::fock
