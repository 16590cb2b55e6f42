// noise.hpp — reproducible stochastic drivers and covariance estimation
//
// Brownian increments, bath initial conditions x_k, the deterministic noise
// N_D and the random noise N_R, plus lag-resolved covariance estimators.
// Conventions: every stochastic integral is a left-point (Ito) sum; all
// sampling is a pure function of (seed, trajectory_index).
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "decolab/bath.hpp"
#include "decolab/core.hpp"
#include "decolab/grid.hpp"
#include "decolab/params.hpp"
#include "decolab/rng.hpp"

namespace decolab::noise {

using bath::BathSpec;

// Sampled Brownian increments: one system stream b and one stream b_k per
// bath mode. Increments are N(0, dt). Bath increments are stored row-major
// so each mode's stream is contiguous.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DriverPaths {
    TimeGrid grid;
    Eigen::VectorXd b_sys;  // n_steps
    RowMatrixXd b_bath;     // n_modes x n_steps
    std::uint64_t seed = 0;
    std::uint32_t trajectory_index = 0;

    std::size_t n_modes() const { return static_cast<std::size_t>(b_bath.rows()); }
};

inline DriverPaths make_driver_paths(const TimeGrid& grid, std::size_t n_modes,
                                     std::uint64_t seed, std::uint32_t trajectory_index) {
    grid.validate();
    DriverPaths d;
    d.grid = grid;
    d.seed = seed;
    d.trajectory_index = trajectory_index;
    const auto ns = static_cast<Eigen::Index>(grid.n_steps);
    const double sd = std::sqrt(grid.dt);
    d.b_sys.resize(ns);
    if (ns > 0)
        rng::fill_normals(seed, trajectory_index, rng::stream_id(rng::StreamKind::system_brownian),
                          d.b_sys.data(), grid.n_steps);
    d.b_sys *= sd;
    d.b_bath.resize(static_cast<Eigen::Index>(n_modes), ns);
    for (std::size_t k = 0; k < n_modes; ++k) {
        if (ns > 0)
            rng::fill_normals(seed, trajectory_index,
                              rng::stream_id(rng::StreamKind::bath_brownian, static_cast<std::uint32_t>(k)),
                              d.b_bath.row(static_cast<Eigen::Index>(k)).data(), grid.n_steps);
    }
    d.b_bath *= sd;
    return d;
}

inline DriverPaths zero_driver_paths(const TimeGrid& grid, std::size_t n_modes) {
    DriverPaths d;
    d.grid = grid;
    d.b_sys = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n_steps));
    d.b_bath = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_modes),
                                     static_cast<Eigen::Index>(grid.n_steps));
    return d;
}

// Bath initial conditions x_k ~ N(0, hbar/(2 omega_k)), independent.
struct BathInitials {
    Eigen::VectorXd x;
};

inline BathInitials sample_bath_initials(const BathSpec& spec, const ModelParams& params,
                                         std::uint64_t seed, std::uint32_t trajectory_index) {
    spec.validate();
    params.validate();
    if (spec.n_modes() < 1) throw std::invalid_argument("sample_bath_initials: bath has no modes");
    BathInitials ini;
    ini.x.resize(spec.omegas.size());
    const auto stream = rng::stream_id(rng::StreamKind::bath_initials);
    for (Eigen::Index k = 0; k < spec.omegas.size(); ++k) {
        const double sd = std::sqrt(params.hbar / (2.0 * spec.omegas(k)));
        ini.x(k) = sd * rng::normal_at(seed, trajectory_index, stream, static_cast<std::uint64_t>(k));
    }
    return ini;
}

// N_D(s) = sum_k v_k x_k sqrt(omega_k/omega0) exp(-i omega_k s)
inline ComplexTrajectory deterministic_noise_path(const BathSpec& spec, const BathInitials& initials,
                                                  const ModelParams& params, const TimeGrid& grid) {
    spec.validate();
    params.validate();
    grid.validate();
    if (static_cast<std::size_t>(initials.x.size()) != spec.n_modes())
        throw std::invalid_argument("deterministic_noise_path: initials do not match bath size");
    ComplexTrajectory out(grid);
    const auto n = spec.omegas.size();
    Eigen::VectorXcd phase(n), rot(n);
    Eigen::VectorXd amp(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        amp(k) = spec.couplings(k) * initials.x(k) * std::sqrt(spec.omegas(k) / params.omega0);
        phase(k) = Complex(1.0, 0.0);
        rot(k) = std::exp(Complex(0.0, -spec.omegas(k) * grid.dt));
    }
    for (std::size_t i = 0; i < grid.n_points(); ++i) {
        Complex acc{0.0, 0.0};
        for (Eigen::Index k = 0; k < n; ++k) acc += amp(k) * phase(k);
        out.values(static_cast<Eigen::Index>(i)) = acc;
        phase = phase.cwiseProduct(rot);
    }
    return out;
}

// N_R(s) = lambda sigma sum_k v_k sqrt(omega_k/omega0)
//              int_0^s exp(-i omega_k (s - tau)) db_k(tau)
// with the stochastic integral taken as the left-point sum on the grid.
inline ComplexTrajectory random_noise_path(const BathSpec& spec, const DriverPaths& drivers,
                                           const ModelParams& params) {
    spec.validate();
    params.validate();
    if (drivers.n_modes() != spec.n_modes())
        throw std::invalid_argument("random_noise_path: driver mode count does not match bath");
    const TimeGrid& grid = drivers.grid;
    ComplexTrajectory out(grid);
    const auto n = spec.omegas.size();
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n), rot(n), pref(n);
    const Complex ls = ModelParams::lambda() * params.sigma();
    for (Eigen::Index k = 0; k < n; ++k) {
        rot(k) = std::exp(Complex(0.0, -spec.omegas(k) * grid.dt));
        pref(k) = ls * spec.couplings(k) * std::sqrt(spec.omegas(k) / params.omega0);
    }
    out.values(0) = Complex(0.0, 0.0);
    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        Complex acc{0.0, 0.0};
        for (Eigen::Index k = 0; k < n; ++k) {
            y(k) = rot(k) * (y(k) + drivers.b_bath(k, static_cast<Eigen::Index>(s)));
            acc += pref(k) * y(k);
        }
        out.values(static_cast<Eigen::Index>(s + 1)) = acc;
    }
    return out;
}

// Lag-resolved sample covariance of an ensemble of paths: the average of
// conj-or-not(Z(s)) * Z(s+lag) over s and realizations, with standard errors
// from the realization-to-realization scatter.
struct CovarianceEstimate {
    double dt = 0.0;
    Eigen::VectorXcd cov;  // lag index 0..max_lag
    Eigen::VectorXd se;
};

inline CovarianceEstimate estimate_covariance(std::span<const ComplexTrajectory> ensemble,
                                              bool conjugate_first, std::size_t max_lag,
                                              std::size_t s_min = 0) {
    if (ensemble.size() < 2)
        throw std::invalid_argument("estimate_covariance: need at least 2 trajectories");
    const TimeGrid grid = ensemble[0].grid;
    for (const auto& tr : ensemble) {
        tr.check_consistent();
        if (!(tr.grid == grid))
            throw std::invalid_argument("estimate_covariance: trajectories on different grids");
    }
    max_lag = std::min(max_lag, grid.n_steps);
    if (s_min + max_lag >= grid.n_points())
        throw std::invalid_argument("estimate_covariance: lag window exceeds grid");

    CovarianceEstimate est;
    est.dt = grid.dt;
    est.cov.resize(static_cast<Eigen::Index>(max_lag + 1));
    est.se.resize(static_cast<Eigen::Index>(max_lag + 1));
    const std::size_t n_traj = ensemble.size();
    std::vector<Complex> per_traj(n_traj);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        const std::size_t s_max = grid.n_points() - lag;  // exclusive
        for (std::size_t r = 0; r < n_traj; ++r) {
            const auto& z = ensemble[r].values;
            Complex acc{0.0, 0.0};
            for (std::size_t s = s_min; s < s_max; ++s) {
                const Complex a = z(static_cast<Eigen::Index>(s));
                const Complex b = z(static_cast<Eigen::Index>(s + lag));
                acc += (conjugate_first ? std::conj(a) : a) * b;
            }
            per_traj[r] = acc / static_cast<double>(s_max - s_min);
        }
        const MCEstimate m = mc_estimate(per_traj);
        est.cov(static_cast<Eigen::Index>(lag)) = m.mean;
        est.se(static_cast<Eigen::Index>(lag)) = m.se;
    }
    return est;
}

// Integral of the covariance over lags in [-L, L], evaluated per realization
// and then averaged, so the quoted standard error covers the whole integral.
// Negative lags use the symmetry C(-u) = conj(C(u)) (conjugate covariance)
// or C(-u) = C(u) (plain covariance).
inline MCEstimate integrated_lag_covariance(std::span<const ComplexTrajectory> ensemble,
                                            bool conjugate_first, double lag_window,
                                            double s_min_time = 0.0, double s_max_time = -1.0) {
    if (ensemble.size() < 2)
        throw std::invalid_argument("integrated_lag_covariance: need at least 2 trajectories");
    const TimeGrid grid = ensemble[0].grid;
    const auto max_lag = static_cast<std::size_t>(std::floor(lag_window / grid.dt + 0.5));
    const auto s_min = static_cast<std::size_t>(std::floor(s_min_time / grid.dt + 0.5));
    const std::size_t s_cap = s_max_time < 0.0
        ? grid.n_points()
        : static_cast<std::size_t>(std::floor(s_max_time / grid.dt + 0.5)) + 1;
    if (s_min + max_lag >= grid.n_points())
        throw std::invalid_argument("integrated_lag_covariance: window exceeds grid");
    if (s_cap <= s_min)
        throw std::invalid_argument("integrated_lag_covariance: empty s-window");

    std::vector<Complex> per_traj(ensemble.size());
    for (std::size_t r = 0; r < ensemble.size(); ++r) {
        const auto& tr = ensemble[r];
        if (!(tr.grid == grid))
            throw std::invalid_argument("integrated_lag_covariance: grid mismatch");
        const auto& z = tr.values;
        Complex integral{0.0, 0.0};
        for (std::size_t lag = 0; lag <= max_lag; ++lag) {
            const std::size_t s_max = std::min(grid.n_points() - lag, s_cap);
            Complex acc{0.0, 0.0};
            for (std::size_t s = s_min; s < s_max; ++s) {
                const Complex a = z(static_cast<Eigen::Index>(s));
                const Complex b = z(static_cast<Eigen::Index>(s + lag));
                acc += (conjugate_first ? std::conj(a) : a) * b;
            }
            const Complex c = acc / static_cast<double>(s_max - s_min);
            if (lag == 0) {
                integral += c * grid.dt;
            } else {
                const Complex c_neg = conjugate_first ? std::conj(c) : c;
                integral += (c + c_neg) * grid.dt;
            }
        }
        per_traj[r] = integral;
    }
    return mc_estimate(per_traj);
}

} // namespace decolab::noise
