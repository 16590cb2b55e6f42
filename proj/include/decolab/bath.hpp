// bath.hpp — reservoir discretization and the memory kernel
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "decolab/core.hpp"

namespace decolab::bath {

// Mode frequencies omega_k > 0 and real couplings v_k.
struct BathSpec {
    Eigen::VectorXd omegas;
    Eigen::VectorXd couplings;

    std::size_t n_modes() const { return static_cast<std::size_t>(omegas.size()); }

    void validate() const {
        if (omegas.size() != couplings.size())
            throw std::invalid_argument("BathSpec: omegas and couplings must have equal length");
        for (Eigen::Index k = 0; k < omegas.size(); ++k)
            if (!(omegas(k) > 0.0))
                throw std::invalid_argument("BathSpec: all mode frequencies must be > 0");
    }
};

// Placement of the Ohmic mode comb. `endpoint` puts omega_k = k*dw (the
// plain plug-in rule); `midpoint` puts omega_k = (k-1/2)*dw, which removes
// the half-cell bias at omega = 0 and is what the white-noise-limit
// experiments use. Couplings are v_k^2 = a*dw/pi in both cases.
enum class OhmicGrid { endpoint, midpoint };

inline BathSpec ohmic_bath(std::size_t n_modes, double delta_omega, double a,
                           OhmicGrid grid = OhmicGrid::endpoint) {
    if (n_modes < 1) throw std::invalid_argument("ohmic_bath: n_modes must be >= 1");
    if (!(delta_omega > 0.0)) throw std::invalid_argument("ohmic_bath: delta_omega must be > 0");
    if (!(a >= 0.0)) throw std::invalid_argument("ohmic_bath: friction a must be >= 0");
    BathSpec spec;
    const auto n = static_cast<Eigen::Index>(n_modes);
    spec.omegas.resize(n);
    spec.couplings.resize(n);
    const double v = std::sqrt(a * delta_omega / kPi);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double idx = static_cast<double>(k + 1) - (grid == OhmicGrid::midpoint ? 0.5 : 0.0);
        spec.omegas(k) = idx * delta_omega;
        spec.couplings(k) = v;
    }
    return spec;
}

// K(s) = sum_k v_k^2 exp(-i omega_k s)
inline Complex memory_kernel(const BathSpec& spec, double s) {
    Complex acc{0.0, 0.0};
    for (Eigen::Index k = 0; k < spec.omegas.size(); ++k) {
        const double v2 = spec.couplings(k) * spec.couplings(k);
        acc += v2 * Complex(std::cos(spec.omegas(k) * s), -std::sin(spec.omegas(k) * s));
    }
    return acc;
}

// Finite mode combs recur at t = 2*pi/min-spacing; experiments should stay
// below half of that.
inline double poincare_recurrence_time(const BathSpec& spec) {
    if (spec.n_modes() < 1) return std::numeric_limits<double>::infinity();
    double gap = spec.omegas(0);
    for (Eigen::Index k = 1; k < spec.omegas.size(); ++k)
        gap = std::min(gap, spec.omegas(k) - spec.omegas(k - 1));
    if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 * kPi / gap;
}

} // namespace decolab::bath
