// sde.hpp — complex linear SDE integration and the stochastic representation
// of the free-oscillator unitary evolution
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "decolab/core.hpp"
#include "decolab/grid.hpp"
#include "decolab/noise.hpp"
#include "decolab/params.hpp"

namespace decolab::sde {

using bath::Stepper;

// dz = A z dt + B db, with db the driver increment vector (system stream
// first, then the bath streams of the DriverPaths).
struct LinearSDE {
    Eigen::MatrixXcd drift;      // A, dim x dim
    Eigen::MatrixXcd noise_map;  // B, dim x n_drivers

    std::size_t dim() const { return static_cast<std::size_t>(drift.rows()); }

    void validate() const {
        if (drift.rows() != drift.cols())
            throw std::invalid_argument("LinearSDE: drift must be square");
        if (noise_map.rows() != drift.rows())
            throw std::invalid_argument("LinearSDE: noise map row count must match dim");
    }
};

namespace detail {

inline Eigen::VectorXd driver_vector(const noise::DriverPaths& d, std::size_t step, std::size_t n_drivers) {
    Eigen::VectorXd db(static_cast<Eigen::Index>(n_drivers));
    db(0) = d.b_sys(static_cast<Eigen::Index>(step));
    for (std::size_t k = 0; k + 1 < n_drivers; ++k)
        db(static_cast<Eigen::Index>(k + 1)) = d.b_bath(static_cast<Eigen::Index>(k),
                                                        static_cast<Eigen::Index>(step));
    return db;
}

} // namespace detail

// Ito integration of the linear SDE. Increments enter at the left point of
// each step; the exact propagator applies exp(A dt) to the kicked state, so
// paths match the left-point closed-form sums on shared drivers exactly.
inline std::vector<Eigen::VectorXcd> integrate_linear_sde(const LinearSDE& sys,
                                                          const Eigen::VectorXcd& z0,
                                                          const noise::DriverPaths& drivers,
                                                          Stepper stepper = Stepper::exact_propagator) {
    sys.validate();
    drivers.grid.validate();
    if (z0.size() != sys.drift.rows())
        throw std::invalid_argument("integrate_linear_sde: initial state has wrong dimension");
    const auto n_drivers = static_cast<std::size_t>(sys.noise_map.cols());
    if (n_drivers > 0 && drivers.n_modes() + 1 < n_drivers)
        throw std::invalid_argument("integrate_linear_sde: drivers carry too few streams");
    const TimeGrid& grid = drivers.grid;
    if (stepper == Stepper::euler) {
        const double anorm = sys.drift.cwiseAbs().rowwise().sum().maxCoeff();
        if (grid.dt * anorm > 0.1)
            throw step_size_error("integrate_linear_sde: euler requires dt*||A|| <= 0.1");
    }

    Eigen::MatrixXcd E;
    if (stepper == Stepper::exact_propagator) {
        E = (sys.drift * grid.dt).exp();
    }

    std::vector<Eigen::VectorXcd> out;
    out.reserve(grid.n_points());
    Eigen::VectorXcd z = z0;
    out.push_back(z);
    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        if (n_drivers > 0) z += sys.noise_map * detail::driver_vector(drivers, s, n_drivers);
        if (stepper == Stepper::exact_propagator)
            z = E * z;
        else
            z += grid.dt * (sys.drift * z);
        out.push_back(z);
    }
    return out;
}

// Covariance of the exactly integrated per-step noise,
// int_0^dt exp(A s) B B^dag exp(A^dag s) ds, by Simpson quadrature.
// Used as a statistics oracle for the stepping conventions.
inline Eigen::MatrixXcd step_noise_covariance(const LinearSDE& sys, double dt, int n_quad = 64) {
    sys.validate();
    if (n_quad % 2 == 1) ++n_quad;
    const Eigen::MatrixXcd BBt = sys.noise_map * sys.noise_map.adjoint();
    const double h = dt / n_quad;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(sys.drift.rows(), sys.drift.cols());
    for (int i = 0; i <= n_quad; ++i) {
        const Eigen::MatrixXcd Es = (sys.drift * (h * i)).exp();
        const double w = (i == 0 || i == n_quad) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * (Es * BBt * Es.adjoint());
    }
    return acc * (h / 3.0);
}

// Closed-form free-oscillator path
//   q(s) = exp(-i w s) x + lambda sigma int_0^s exp(-i w (s-tau)) db(tau)
// with the stochastic integral as a left-point sum on the grid.
inline ComplexTrajectory free_oscillator_solution(double omega, double x,
                                                  const noise::DriverPaths& drivers,
                                                  const ModelParams& params) {
    params.validate();
    const TimeGrid& grid = drivers.grid;
    grid.validate();
    ComplexTrajectory out(grid);
    const Complex rot = std::exp(Complex(0.0, -omega * grid.dt));
    const Complex ls = ModelParams::lambda() * params.sigma();
    Complex q = Complex(x, 0.0);
    out.values(0) = q;
    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        q = rot * (q + ls * drivers.b_sys(static_cast<Eigen::Index>(s)));
        out.values(static_cast<Eigen::Index>(s + 1)) = q;
    }
    return out;
}

// Polynomial in one complex variable, coefficient order c0 + c1 z + ...
using Polynomial = std::vector<Complex>;

inline Complex eval_poly(const Polynomial& p, Complex z) {
    Complex acc{0.0, 0.0};
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

// Monte Carlo estimate of E[phi(q_t(x))] for the free oscillator; multiplying
// by the reference-state factor chi_t(x) = chi_0(x) exp(-i omega t / 2)
// turns it into the evolved wave function at x.
inline MCEstimate stochastic_expectation(const Polynomial& phi, double x, double t, double omega,
                                         const ModelParams& params, std::size_t n_traj,
                                         std::uint64_t seed, double dt = 1e-3,
                                         unsigned threads = 1) {
    if (phi.size() > 9)
        throw std::invalid_argument("stochastic_expectation: polynomial degree must be <= 8");
    if (n_traj == 0) throw std::invalid_argument("stochastic_expectation: n_traj must be > 0");
    params.validate();
    TimeGrid grid{dt, static_cast<std::size_t>(std::ceil(t / dt - 0.5))};
    if (grid.n_steps * dt < t) ++grid.n_steps;
    grid.dt = grid.n_steps > 0 ? t / static_cast<double>(grid.n_steps) : dt;

    std::vector<Complex> samples(n_traj);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        const auto d = noise::make_driver_paths(grid, 0, seed, static_cast<std::uint32_t>(i));
        const auto q = free_oscillator_solution(omega, x, d, params);
        samples[i] = eval_poly(phi, q.values(q.values.size() - 1));
    });
    return mc_estimate(samples);
}

// Gauss-Hermite nodes/weights for int exp(-y^2) f(y) dy (Golub-Welsch).
struct GaussHermite {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

inline GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: need n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = std::sqrt(i / 2.0);
        J(i - 1, i) = b;
        J(i, i - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite gh;
    gh.nodes = es.eigenvalues();
    gh.weights.resize(n);
    const double mu0 = std::sqrt(kPi);
    for (int i = 0; i < n; ++i) {
        const double v = es.eigenvectors()(0, i);
        gh.weights(i) = mu0 * v * v;
    }
    return gh;
}

// <chi| F(x_t) G(x) |chi> for the stationary ground state:
// E[ int dx |chi_0(x)|^2 F(x) G(q_t(x)) ], x-integration by Gauss-Hermite
// matched to |chi_0|^2 = exp(-omega x^2 / hbar), Monte Carlo over paths.
// One driver path serves all quadrature nodes of a realization, since
// q_t(x) = exp(-i omega t) x + (path noise) shares the noise across x.
inline MCEstimate correlation_function(const Polynomial& F, const Polynomial& G, double t,
                                       double omega, const ModelParams& params,
                                       std::size_t n_traj, std::uint64_t seed,
                                       int n_nodes = 64, double dt = 1e-3,
                                       unsigned threads = 1) {
    params.validate();
    if (n_traj == 0) throw std::invalid_argument("correlation_function: n_traj must be > 0");
    TimeGrid grid{dt, static_cast<std::size_t>(std::ceil(t / dt - 0.5))};
    if (grid.n_steps * dt < t) ++grid.n_steps;
    grid.dt = grid.n_steps > 0 ? t / static_cast<double>(grid.n_steps) : dt;

    const GaussHermite gh = gauss_hermite(n_nodes);
    const double scale = std::sqrt(params.hbar / omega);  // x = scale * y
    const double wsum = gh.weights.sum();
    const Complex rot_t = std::exp(Complex(0.0, -omega * t));

    std::vector<Complex> samples(n_traj);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        const auto d = noise::make_driver_paths(grid, 0, seed, static_cast<std::uint32_t>(i));
        const auto path0 = free_oscillator_solution(omega, 0.0, d, params);
        const Complex noise_part = path0.values(path0.values.size() - 1);
        Complex acc{0.0, 0.0};
        for (int m = 0; m < n_nodes; ++m) {
            const double x = scale * gh.nodes(m);
            const Complex q = rot_t * x + noise_part;
            acc += gh.weights(m) * eval_poly(F, Complex(x, 0.0)) * eval_poly(G, q);
        }
        samples[i] = acc / wsum;  // normalized ground-state measure
    });
    return mc_estimate(samples);
}

} // namespace decolab::sde
