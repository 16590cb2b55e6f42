// bath_dynamics.hpp — exact simulation of the coupled system+reservoir SDEs
// and the reduced memory-kernel equation for the oscillator coordinate
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>

#include "decolab/bath.hpp"
#include "decolab/core.hpp"
#include "decolab/grid.hpp"
#include "decolab/noise.hpp"
#include "decolab/params.hpp"

namespace decolab::bath {

enum class Stepper { euler, exact_propagator };

// Memory model: the coupled solver holds the full (1+n_modes) state; the
// exact propagator additionally materializes a dense (1+n)^2 step matrix.
inline constexpr std::size_t kMaxCoupledModes = 16384;
inline constexpr std::size_t kMaxExactPropagatorModes = 4096;

struct CoupledResult {
    ComplexTrajectory Q;
    Eigen::VectorXcd final_modes;
    std::optional<Eigen::MatrixXcd> mode_paths;  // n_modes x n_points when requested
};

namespace detail {

inline void warn_if_beyond_recurrence(const BathSpec& spec, const TimeGrid& grid) {
    const double trec = poincare_recurrence_time(spec);
    if (grid.total_time() > 0.5 * trec) {
        std::fprintf(stderr,
                     "[decolab] warning: horizon T=%.3g exceeds half the bath recurrence time %.3g\n",
                     grid.total_time(), trec);
    }
}

// Drift matrix of the coupled linear system (Q first, then the modes).
inline Eigen::MatrixXcd coupled_drift(const BathSpec& spec, const ModelParams& params) {
    const auto n = static_cast<Eigen::Index>(spec.n_modes());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    M(0, 0) = Complex(0.0, -params.omega0);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double w = spec.omegas(k), v = spec.couplings(k);
        M(0, k + 1) = -v * std::sqrt(w / params.omega0);
        M(k + 1, 0) = v * std::sqrt(params.omega0 / w);
        M(k + 1, k + 1) = Complex(0.0, -w);
    }
    return M;
}

// exp(M dt). M is similar to -i H with H Hermitian under the diagonal weight
// w = (1, omega_k/omega0), so the exponential comes from one Hermitian
// eigensolve and is exactly norm-preserving in that metric.
inline Eigen::MatrixXcd coupled_propagator(const BathSpec& spec, const ModelParams& params, double dt) {
    const auto n = static_cast<Eigen::Index>(spec.n_modes());
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    H(0, 0) = params.omega0;
    for (Eigen::Index k = 0; k < n; ++k) {
        H(k + 1, k + 1) = spec.omegas(k);
        H(0, k + 1) = Complex(0.0, -spec.couplings(k));
        H(k + 1, 0) = Complex(0.0, spec.couplings(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("coupled_propagator: eigensolve failed");
    Eigen::VectorXcd phase(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i)
        phase(i) = std::exp(Complex(0.0, -es.eigenvalues()(i) * dt));
    Eigen::VectorXd whalf(n + 1), winv(n + 1);
    whalf(0) = 1.0;
    winv(0) = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        whalf(k + 1) = std::sqrt(spec.omegas(k) / params.omega0);
        winv(k + 1) = 1.0 / whalf(k + 1);
    }
    Eigen::MatrixXcd E = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    return winv.asDiagonal() * E * whalf.asDiagonal();
}

} // namespace detail

// Integrates the coupled SDEs
//   dq_k = -i w_k q_k dt + v_k sqrt(w0/w_k) Q dt + lambda sigma db_k
//   dQ   = -i w0  Q  dt  - sum_k v_k sqrt(w_k/w0) q_k dt + lambda sigma db
// Noise increments enter at the left point of each step; the exact
// propagator then applies exp(M dt) to the kicked state.
inline CoupledResult simulate_coupled(const BathSpec& spec, const ModelParams& params,
                                      const noise::BathInitials& initials, Complex Q0,
                                      const noise::DriverPaths& drivers,
                                      Stepper stepper = Stepper::exact_propagator,
                                      bool store_mode_paths = false) {
    spec.validate();
    params.validate();
    drivers.grid.validate();
    const std::size_t n = spec.n_modes();
    if (static_cast<std::size_t>(initials.x.size()) != n)
        throw std::invalid_argument("simulate_coupled: initials do not match bath size");
    if (drivers.n_modes() != n)
        throw std::invalid_argument("simulate_coupled: drivers do not match bath size");
    if (n > kMaxCoupledModes)
        throw std::invalid_argument("simulate_coupled: bath exceeds the coupled-solver cap (16384 modes)");
    if (stepper == Stepper::exact_propagator && n > kMaxExactPropagatorModes)
        throw std::invalid_argument("simulate_coupled: exact propagator capped at 4096 modes");
    const TimeGrid& grid = drivers.grid;
    if (stepper == Stepper::euler) {
        const double wmax = n > 0 ? spec.omegas.maxCoeff() : params.omega0;
        if (grid.dt * std::max(wmax, params.omega0) > 0.1)
            throw step_size_error("simulate_coupled: euler requires dt*max(omega) <= 0.1");
    }
    detail::warn_if_beyond_recurrence(spec, grid);

    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::VectorXcd z(ni + 1);
    z(0) = Q0;
    for (Eigen::Index k = 0; k < ni; ++k) z(k + 1) = initials.x(k);

    CoupledResult res;
    res.Q = ComplexTrajectory(grid);
    res.Q.values(0) = z(0);
    if (store_mode_paths) {
        res.mode_paths.emplace(ni, static_cast<Eigen::Index>(grid.n_points()));
        res.mode_paths->col(0) = z.tail(ni);
    }

    const Complex ls = ModelParams::lambda() * params.sigma();
    Eigen::MatrixXcd E, M;
    if (stepper == Stepper::exact_propagator)
        E = detail::coupled_propagator(spec, params, grid.dt);
    else
        M = detail::coupled_drift(spec, params);

    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        z(0) += ls * drivers.b_sys(static_cast<Eigen::Index>(s));
        for (Eigen::Index k = 0; k < ni; ++k)
            z(k + 1) += ls * drivers.b_bath(k, static_cast<Eigen::Index>(s));
        if (stepper == Stepper::exact_propagator)
            z = E * z;
        else
            z += grid.dt * (M * z);
        res.Q.values(static_cast<Eigen::Index>(s + 1)) = z(0);
        if (store_mode_paths) res.mode_paths->col(static_cast<Eigen::Index>(s + 1)) = z.tail(ni);
    }
    res.final_modes = z.tail(ni);
    return res;
}

// Integrates the reduced equation
//   dQ = -i w0 Q dtau - (int_0^tau K(tau-s) Q(s) ds) dtau
//        - N_D dtau - N_R dtau + lambda sigma db.
// The memory integral is a trapezoid over the grid, written mode-wise with
// exact phase weights, and the current-step endpoint comes from a predictor
// step. Forcing terms integrate by trapezoid; the bath increments landing
// inside the current step carry only half trapezoid weight in N_R, so their
// missing share is completed directly from the driver increments when the
// drivers carry matching bath streams.
inline ComplexTrajectory simulate_reduced(const BathSpec& spec, const ModelParams& params,
                                          const ComplexTrajectory& nd, const ComplexTrajectory& nr,
                                          Complex Q0, const noise::DriverPaths& drivers,
                                          Stepper stepper = Stepper::exact_propagator) {
    spec.validate();
    params.validate();
    nd.check_consistent();
    nr.check_consistent();
    const TimeGrid& grid = drivers.grid;
    grid.validate();
    if (!(nd.grid == grid) || !(nr.grid == grid))
        throw std::invalid_argument("simulate_reduced: noise paths and drivers on different grids");
    detail::warn_if_beyond_recurrence(spec, grid);

    const auto n = spec.omegas.size();
    const double dt = grid.dt;
    const Complex ls = ModelParams::lambda() * params.sigma();
    const Complex iw0(0.0, params.omega0);

    Eigen::VectorXcd rot(n), v2(n), kick_w(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double w = spec.omegas(k), v = spec.couplings(k);
        rot(k) = std::exp(Complex(0.0, -w * dt));
        v2(k) = v * v;
        const Complex iw(0.0, w);
        kick_w(k) = ls * v * std::sqrt(w / params.omega0)
                    * ((1.0 - rot(k)) / iw - 0.5 * dt * rot(k));
    }
    const bool complete_kicks = drivers.n_modes() == spec.n_modes() && n > 0;

    ComplexTrajectory out(grid);
    Complex Q = Q0;
    out.values(0) = Q;
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);  // per-mode memory auxiliaries

    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        const Complex kicked = Q + ls * drivers.b_sys(si);
        Complex kick_corr{0.0, 0.0};
        if (complete_kicks)
            for (Eigen::Index k = 0; k < n; ++k) kick_corr += kick_w(k) * drivers.b_bath(k, si);

        const Complex mem = v2.cwiseProduct(y).sum();  // sum v_k^2 y_k
        const Complex f1 = -iw0 * kicked - mem - nd.values(si) - nr.values(si);

        if (stepper == Stepper::euler) {
            Q = kicked + dt * f1 - kick_corr;
            y = rot.cwiseProduct(y + Eigen::VectorXcd::Constant(n, dt * kicked));
        } else {
            const Complex Qp = kicked + dt * f1 - kick_corr;
            Eigen::VectorXcd ystar =
                rot.cwiseProduct(y + Eigen::VectorXcd::Constant(n, 0.5 * dt * kicked))
                + Eigen::VectorXcd::Constant(n, 0.5 * dt * Qp);
            const Complex memp = v2.cwiseProduct(ystar).sum();
            const Complex f2 = -iw0 * Qp - memp - nd.values(si + 1) - nr.values(si + 1);
            Q = kicked + 0.5 * dt * (f1 + f2) - kick_corr;
            y = rot.cwiseProduct(y + Eigen::VectorXcd::Constant(n, 0.5 * dt * kicked))
                + Eigen::VectorXcd::Constant(n, 0.5 * dt * Q);
        }
        out.values(si + 1) = Q;
    }
    return out;
}

// Same stepping with the memory term replaced by the Markovian friction a*Q;
// the comparison partner for the Ohmic-limit checks.
inline ComplexTrajectory simulate_friction(const ModelParams& params, double a,
                                           const ComplexTrajectory& nd, const ComplexTrajectory& nr,
                                           Complex Q0, const noise::DriverPaths& drivers) {
    params.validate();
    const TimeGrid& grid = drivers.grid;
    if (!(nd.grid == grid) || !(nr.grid == grid))
        throw std::invalid_argument("simulate_friction: noise paths and drivers on different grids");
    const double dt = grid.dt;
    const Complex ls = ModelParams::lambda() * params.sigma();
    const Complex drift(-a, -params.omega0);

    ComplexTrajectory out(grid);
    Complex Q = Q0;
    out.values(0) = Q;
    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        const Complex kicked = Q + ls * drivers.b_sys(si);
        const Complex f1 = drift * kicked - nd.values(si) - nr.values(si);
        const Complex Qp = kicked + dt * f1;
        const Complex f2 = drift * Qp - nd.values(si + 1) - nr.values(si + 1);
        Q = kicked + 0.5 * dt * (f1 + f2);
        out.values(si + 1) = Q;
    }
    return out;
}

} // namespace decolab::bath
