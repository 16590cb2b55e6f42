// lindblad.hpp — master-equation generator, energy-representation recursion,
// RK4 integration with invariant monitoring, and the analytic decay labels
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "decolab/core.hpp"
#include "decolab/density.hpp"
#include "decolab/fock.hpp"
#include "decolab/params.hpp"

namespace decolab::lindblad {

using fock::FockOperators;

// -(i/hbar)[H0, rho] - (eps/hbar)(H0 rho + rho H0) + hbar eps L rho L^dag
inline Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const FockOperators& ops,
                                     const ModelParams& params) {
    if (rho.rows() != ops.H0.rows() || rho.cols() != ops.H0.cols())
        throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    const double eps = params.epsilon();
    const Complex ih(0.0, 1.0 / params.hbar);
    return -ih * (ops.H0 * rho - rho * ops.H0)
           - (eps / params.hbar) * (ops.H0 * rho + rho * ops.H0)
           + (params.hbar * eps) * (ops.L * rho * ops.L.adjoint());
}

// Entrywise form of the same generator:
// d rho_jk = -i w0 (j-k) rho_jk - eps w0 (j+k) rho_jk
//            + 2 eps w0 sqrt((j+1)(k+1)) rho_{j+1,k+1}
// with the truncation closure rho_{d,.} = 0.
inline Eigen::MatrixXcd energy_rep_rhs(const Eigen::MatrixXcd& rho, const ModelParams& params) {
    const auto d = rho.rows();
    const double w0 = params.omega0, eps = params.epsilon();
    Eigen::MatrixXcd out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
            Complex v = Complex(-eps * w0 * static_cast<double>(j + k),
                                -w0 * static_cast<double>(j - k)) * rho(j, k);
            if (j + 1 < d && k + 1 < d)
                v += 2.0 * eps * w0
                     * std::sqrt(static_cast<double>((j + 1) * (k + 1))) * rho(j + 1, k + 1);
            out(j, k) = v;
        }
    }
    return out;
}

enum class Generator { full, energy_rep };

struct MasterTrajectory {
    std::vector<double> times;
    std::vector<FockDensityMatrix> states;
    double max_trace_drift = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue_seen = 0.0;
};

// Classical RK4 on the master equation. Trace and hermiticity are monitored
// every step, positivity at every sampled state; a breach beyond the
// FockDensityMatrix tolerances aborts with step diagnostics.
inline MasterTrajectory integrate_master(const FockDensityMatrix& rho0, const ModelParams& params,
                                         double T, double dt, Generator gen = Generator::energy_rep,
                                         std::size_t sample_stride = 0,
                                         bool enforce_invariants = true) {
    params.validate();
    if (!(dt > 0.0) || !(T >= 0.0)) throw std::invalid_argument("integrate_master: bad T or dt");
    if (dt * params.omega0 * static_cast<double>(rho0.dim) > 0.05 + 1e-12)
        throw step_size_error("integrate_master: requires dt*omega0*dim <= 0.05");

    FockOperators ops;
    if (gen == Generator::full) ops = fock::build_operators(rho0.dim, params);
    auto rhs = [&](const Eigen::MatrixXcd& r) {
        return gen == Generator::full ? lindblad_rhs(r, ops, params) : energy_rep_rhs(r, params);
    };

    const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
    if (sample_stride == 0) sample_stride = std::max<std::size_t>(1, n_steps / 256);

    MasterTrajectory out;
    Eigen::MatrixXcd rho = rho0.rho;
    const double tr0 = rho.trace().real();
    out.times.push_back(0.0);
    out.states.emplace_back(rho, 0.0);
    out.min_eigenvalue_seen = out.states.back().min_eigenvalue();

    for (std::size_t s = 1; s <= n_steps; ++s) {
        const Eigen::MatrixXcd k1 = rhs(rho);
        const Eigen::MatrixXcd k2 = rhs(rho + (0.5 * dt) * k1);
        const Eigen::MatrixXcd k3 = rhs(rho + (0.5 * dt) * k2);
        const Eigen::MatrixXcd k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t = static_cast<double>(s) * dt;

        const double tr_drift = std::abs(rho.trace().real() - tr0);
        const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        out.max_trace_drift = std::max(out.max_trace_drift, tr_drift);
        out.max_hermiticity_error = std::max(out.max_hermiticity_error, herm);
        if (enforce_invariants) {
            if (tr_drift > FockDensityMatrix::kTraceTol * std::max(1.0, t))
                throw integration_failure("integrate_master: trace drift exceeds tolerance", s, t);
            if (herm > FockDensityMatrix::kHermTol)
                throw integration_failure("integrate_master: hermiticity breach", s, t);
        }

        if (s % sample_stride == 0 || s == n_steps) {
            out.times.push_back(t);
            out.states.emplace_back(rho, t);
            const double mineig = out.states.back().min_eigenvalue();
            out.min_eigenvalue_seen = std::min(out.min_eigenvalue_seen, mineig);
            if (enforce_invariants && mineig < FockDensityMatrix::kPositivityTol)
                throw integration_failure("integrate_master: positivity breach", s, t);
        }
    }
    return out;
}

// Eq.-(32)-style multiplier: exp(-(i/hbar)(E_j - E_k) t - (eps/hbar)(sqrt(E_j)-sqrt(E_k))^2 t)
// with E_k = hbar omega0 k.
inline Complex analytic_offdiagonal_decay(std::size_t j, std::size_t k, double t,
                                          const ModelParams& params) {
    const double Ej = params.hbar * params.omega0 * static_cast<double>(j);
    const double Ek = params.hbar * params.omega0 * static_cast<double>(k);
    const double rate = params.epsilon() / params.hbar * std::pow(std::sqrt(Ej) - std::sqrt(Ek), 2);
    const double phase = (Ej - Ek) * t / params.hbar;
    return std::exp(Complex(-rate * t, -phase));
}

enum class LocalizationRegime { momentum, position };

// Asymptotic localization-rate labels: (eps/2 hbar)(p-p')^2 in the
// kinetic-dominated regime, (eps omega0^2/hbar)(X-X')^2 in the
// potential-dominated regime.
inline double localization_rate(const ModelParams& params, double delta, LocalizationRegime regime) {
    const double eps = params.epsilon();
    if (regime == LocalizationRegime::momentum)
        return eps / (2.0 * params.hbar) * delta * delta;
    return eps * params.omega0 * params.omega0 / params.hbar * delta * delta;
}

// Least-squares slope of log|values| over [t1, t2]; returns the decay rate.
inline double fit_decay_rate(std::span<const double> times, std::span<const double> values,
                             double t1, double t2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t1 || times[i] > t2) continue;
        if (!(values[i] > 0.0)) continue;
        const double x = times[i], y = std::log(values[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("fit_decay_rate: window holds fewer than 2 points");
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    return -(static_cast<double>(n) * sxy - sx * sy) / denom;
}

} // namespace decolab::lindblad
