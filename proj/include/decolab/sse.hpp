// sse.hpp — Markovian limit: white-noise drivers, the Ohmic Q-equation,
// the linear stochastic Schrödinger equation in the truncated Fock basis,
// and assembly of the reduced density matrix from trajectory ensembles
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "decolab/core.hpp"
#include "decolab/density.hpp"
#include "decolab/fock.hpp"
#include "decolab/grid.hpp"
#include "decolab/params.hpp"
#include "decolab/rng.hpp"

namespace decolab::sse {

using fock::FockOperators;

// White-noise increments of the Markov limit:
//   B_D complex with E[conj(dB_D) dB_D] = hbar eps dt, E[dB_D dB_D] = 0
//   B_R real with E[dB_R^2] = hbar eps dt
//   b   real with E[db^2] = dt
// The three drivers are mutually independent.
struct MarkovDrivers {
    TimeGrid grid;
    Eigen::VectorXcd dBD;
    Eigen::VectorXd dBR;
    Eigen::VectorXd db;
    std::uint64_t seed = 0;
    std::uint32_t trajectory_index = 0;
};

// Stream addressing for nested ensembles: `side` distinguishes the bra/ket
// factors, `replica` the inner realizations. B_D is drawn per outer
// realization only (side = replica = 0 by convention of the caller).
inline MarkovDrivers make_markov_drivers(const TimeGrid& grid, const ModelParams& params,
                                         std::uint64_t seed, std::uint32_t trajectory_index,
                                         std::uint32_t side = 0, std::uint32_t replica = 0) {
    grid.validate();
    params.validate();
    MarkovDrivers d;
    d.grid = grid;
    d.seed = seed;
    d.trajectory_index = trajectory_index;
    const auto ns = static_cast<Eigen::Index>(grid.n_steps);
    const double he = params.hbar * params.epsilon();
    Eigen::VectorXd g1(ns), g2(ns);
    if (ns > 0) {
        rng::fill_normals(seed, trajectory_index,
                          rng::stream_id(rng::StreamKind::markov_bd, 2 * replica, side),
                          g1.data(), grid.n_steps);
        rng::fill_normals(seed, trajectory_index,
                          rng::stream_id(rng::StreamKind::markov_bd, 2 * replica + 1, side),
                          g2.data(), grid.n_steps);
    }
    d.dBD.resize(ns);
    const double sd = std::sqrt(he * grid.dt / 2.0);
    for (Eigen::Index i = 0; i < ns; ++i) d.dBD(i) = Complex(sd * g1(i), sd * g2(i));
    d.dBR.resize(ns);
    if (ns > 0)
        rng::fill_normals(seed, trajectory_index,
                          rng::stream_id(rng::StreamKind::markov_br, replica, side),
                          d.dBR.data(), grid.n_steps);
    d.dBR *= std::sqrt(he * grid.dt);
    d.db.resize(ns);
    if (ns > 0)
        rng::fill_normals(seed, trajectory_index,
                          rng::stream_id(rng::StreamKind::markov_b, replica, side),
                          d.db.data(), grid.n_steps);
    d.db *= std::sqrt(grid.dt);
    return d;
}

// dQ = -i w0 Q ds - a Q ds - dB_D - dB_R + lambda sigma db
// Exact scalar propagator with left-point noise injection.
inline ComplexTrajectory simulate_markov_Q(Complex Q0, const ModelParams& params,
                                           const MarkovDrivers& drivers) {
    params.validate();
    const TimeGrid& grid = drivers.grid;
    ComplexTrajectory out(grid);
    const Complex step = std::exp(Complex(-params.a, -params.omega0) * grid.dt);
    const Complex ls = ModelParams::lambda() * params.sigma();
    Complex Q = Q0;
    out.values(0) = Q;
    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        Q = step * (Q - drivers.dBD(si) - drivers.dBR(si) + ls * drivers.db(si));
        out.values(si + 1) = Q;
    }
    return out;
}

// One Euler-Maruyama step of the linear stochastic Schrödinger equation
//   dpsi = -(i/hbar) H0 psi ds - (eps/hbar) H0 psi ds
//          - L psi (dB_D + dB_R) + lambda sigma L psi db
// Trajectories are not normalized; the evolution is a linear unravelling.
struct SSEState {
    Eigen::VectorXcd psi;
    double time = 0.0;
};

inline SSEState sse_step(const SSEState& state, const FockOperators& ops, const ModelParams& params,
                         Complex dBD, double dBR, double db, double dt) {
    const Complex drift = Complex(-params.epsilon() / params.hbar, -1.0 / params.hbar);
    const Eigen::VectorXcd Lpsi = ops.L * state.psi;
    SSEState next;
    next.psi = state.psi + dt * (drift * (ops.H0 * state.psi))
               - Lpsi * (dBD + dBR) + (ModelParams::lambda() * params.sigma() * db) * Lpsi;
    next.time = state.time + dt;
    if (!next.psi.allFinite()) {
        throw numerical_blowup_error("sse_step: non-finite state", 0, next.time,
                                     std::sqrt(state.psi.squaredNorm()));
    }
    return next;
}

// Evolves psi0 through all steps of the drivers, storing snapshots at the
// requested step indices. Checks the Fock-truncated stiffness bound. Same
// update as sse_step, written banded (H0 diagonal, L one superdiagonal) so
// long ensembles do not allocate per step.
inline std::vector<Eigen::VectorXcd> run_sse(const Eigen::VectorXcd& psi0, const FockOperators& ops,
                                             const ModelParams& params, const MarkovDrivers& drivers,
                                             std::span<const std::size_t> snapshot_steps) {
    const TimeGrid& grid = drivers.grid;
    if (grid.dt * params.omega0 * static_cast<double>(ops.dim) > 0.05 + 1e-12)
        throw step_size_error("run_sse: requires dt*omega0*dim <= 0.05");
    const auto d = static_cast<Eigen::Index>(ops.dim);

    Eigen::VectorXcd drift(d);  // 1 + dt * (-(i+eps)/hbar) * hbar w0 n, applied diagonally
    const Complex dcoef = Complex(-params.epsilon() / params.hbar, -1.0 / params.hbar) * grid.dt;
    for (Eigen::Index n = 0; n < d; ++n) drift(n) = 1.0 + dcoef * ops.H0(n, n);
    Eigen::VectorXd lsub(d);  // (L psi)_n = lsub(n) psi_{n+1}
    for (Eigen::Index n = 0; n + 1 < d; ++n) lsub(n) = ops.L(n, n + 1).real();
    lsub(d - 1) = 0.0;
    const Complex ls = ModelParams::lambda() * params.sigma();

    Eigen::VectorXcd psi = psi0, next(d);
    std::vector<Eigen::VectorXcd> out;
    out.reserve(snapshot_steps.size());
    std::size_t next_snap = 0;
    if (next_snap < snapshot_steps.size() && snapshot_steps[next_snap] == 0) {
        out.push_back(psi);
        ++next_snap;
    }
    for (std::size_t s = 0; s < grid.n_steps; ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        const Complex noise = ls * drivers.db(si) - (drivers.dBD(si) + drivers.dBR(si));
        for (Eigen::Index n = 0; n < d - 1; ++n)
            next(n) = drift(n) * psi(n) + noise * (lsub(n) * psi(n + 1));
        next(d - 1) = drift(d - 1) * psi(d - 1);
        psi.swap(next);
        if (next_snap < snapshot_steps.size() && snapshot_steps[next_snap] == s + 1) {
            if (!psi.allFinite())
                throw numerical_blowup_error("run_sse: trajectory blew up", s + 1,
                                             grid.time(s + 1), std::sqrt(psi.squaredNorm()));
            out.push_back(psi);
            ++next_snap;
        }
    }
    if (!psi.allFinite())
        throw numerical_blowup_error("run_sse: trajectory blew up", grid.n_steps,
                                     grid.total_time(), std::sqrt(psi.squaredNorm()));
    return out;
}

// How the noises are assigned to the bra and ket factors of Eq.-(27)-style
// averages. Exactly one assignment reproduces the master equation; the
// artifact decides which one empirically (see the unravelling experiment).
enum class SharingConvention {
    shared_D_inner_Rb,   // B_D shared between bra and ket; B_R and b averaged per factor
    shared_DR_inner_b,   // B_D and B_R shared; b averaged per factor
    all_shared,          // every driver identical between bra and ket
    all_independent,     // every driver independent between bra and ket
};

inline SharingConvention parse_sharing_convention(const std::string& name) {
    if (name == "shared-D-inner-Rb") return SharingConvention::shared_D_inner_Rb;
    if (name == "shared-DR-inner-b") return SharingConvention::shared_DR_inner_b;
    if (name == "all-shared") return SharingConvention::all_shared;
    if (name == "all-independent") return SharingConvention::all_independent;
    throw std::invalid_argument("unknown sharing convention: " + name);
}

inline const char* to_string(SharingConvention c) {
    switch (c) {
        case SharingConvention::shared_D_inner_Rb: return "shared-D-inner-Rb";
        case SharingConvention::shared_DR_inner_b: return "shared-DR-inner-b";
        case SharingConvention::all_shared: return "all-shared";
        case SharingConvention::all_independent: return "all-independent";
    }
    return "?";
}

struct EnsembleSpec {
    std::size_t n_outer = 2;
    std::size_t n_inner = 1;
    std::size_t dim = 8;
    SharingConvention convention = SharingConvention::shared_D_inner_Rb;
};

// Density matrix with entrywise statistical errors, one per snapshot time.
struct DensityEstimate {
    std::vector<FockDensityMatrix> rho;
    std::vector<Eigen::MatrixXd> se;
    std::vector<double> trace_se;
    std::vector<double> times;
};

namespace detail {

// Builds drivers whose three streams come from separately addressed
// (side, replica) slots, so each stream can be shared or private on its own.
inline MarkovDrivers mixed_markov_drivers(const TimeGrid& grid, const ModelParams& params,
                                          std::uint64_t seed, std::uint32_t outer,
                                          std::uint32_t d_side, std::uint32_t d_rep,
                                          std::uint32_t r_side, std::uint32_t r_rep,
                                          std::uint32_t b_side, std::uint32_t b_rep) {
    MarkovDrivers d;
    d.grid = grid;
    d.seed = seed;
    d.trajectory_index = outer;
    const auto ns = static_cast<Eigen::Index>(grid.n_steps);
    const double he = params.hbar * params.epsilon();
    Eigen::VectorXd g1(ns), g2(ns);
    if (ns > 0) {
        rng::fill_normals(seed, outer, rng::stream_id(rng::StreamKind::markov_bd, 2 * d_rep, d_side),
                          g1.data(), grid.n_steps);
        rng::fill_normals(seed, outer, rng::stream_id(rng::StreamKind::markov_bd, 2 * d_rep + 1, d_side),
                          g2.data(), grid.n_steps);
    }
    d.dBD.resize(ns);
    const double sd = std::sqrt(he * grid.dt / 2.0);
    for (Eigen::Index i = 0; i < ns; ++i) d.dBD(i) = Complex(sd * g1(i), sd * g2(i));
    d.dBR.resize(ns);
    d.db.resize(ns);
    if (ns > 0) {
        rng::fill_normals(seed, outer, rng::stream_id(rng::StreamKind::markov_br, r_rep, r_side),
                          d.dBR.data(), grid.n_steps);
        rng::fill_normals(seed, outer, rng::stream_id(rng::StreamKind::markov_b, b_rep, b_side),
                          d.db.data(), grid.n_steps);
    }
    d.dBR *= std::sqrt(he * grid.dt);
    d.db *= std::sqrt(grid.dt);
    return d;
}

} // namespace detail

// Monte Carlo density matrix: for each outer realization, inner-average the
// bra and ket trajectories according to the sharing convention, then average
// the Hermitian pair (ket x bra^dag + bra x ket^dag)/2 over outer
// realizations. Hermiticity is exact by construction.
inline DensityEstimate assemble_density_matrix(const EnsembleSpec& spec,
                                               const Eigen::VectorXcd& psi0,
                                               const ModelParams& params, const TimeGrid& grid,
                                               std::uint64_t seed,
                                               std::span<const std::size_t> snapshot_steps,
                                               unsigned threads = 1) {
    if (spec.n_outer < 2) throw std::invalid_argument("assemble_density_matrix: n_outer must be >= 2");
    if (spec.n_inner < 1) throw std::invalid_argument("assemble_density_matrix: n_inner must be >= 1");
    if (static_cast<std::size_t>(psi0.size()) != spec.dim)
        throw std::invalid_argument("assemble_density_matrix: psi0 does not match dim");
    const FockOperators ops = fock::build_operators(spec.dim, params);
    const std::size_t n_snap = snapshot_steps.size();
    const auto d = static_cast<Eigen::Index>(spec.dim);

    // per-outer Hermitian samples, canonical order
    std::vector<std::vector<Eigen::MatrixXcd>> samples(
        n_snap, std::vector<Eigen::MatrixXcd>(spec.n_outer));

    parallel_for(spec.n_outer, threads, [&](std::size_t o) {
        const auto oi = static_cast<std::uint32_t>(o);
        const bool share_R = spec.convention == SharingConvention::shared_DR_inner_b
                             || spec.convention == SharingConvention::all_shared;
        const bool share_b = spec.convention == SharingConvention::all_shared;
        const bool share_D = spec.convention != SharingConvention::all_independent;

        std::vector<Eigen::MatrixXcd> mean_side(2);
        for (std::uint32_t side = 0; side < 2; ++side) {
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, static_cast<Eigen::Index>(n_snap));
            for (std::uint32_t rep = 0; rep < spec.n_inner; ++rep) {
                const MarkovDrivers drv = detail::mixed_markov_drivers(
                    grid, params, seed, oi,
                    share_D ? 0 : side, share_D ? 0 : rep,
                    share_R ? 0 : side, share_R ? 0 : rep,
                    share_b ? 0 : side, share_b ? 0 : rep);
                const auto snaps = run_sse(psi0, ops, params, drv, snapshot_steps);
                for (std::size_t c = 0; c < n_snap; ++c)
                    acc.col(static_cast<Eigen::Index>(c)) += snaps[c];
            }
            mean_side[side] = acc / static_cast<double>(spec.n_inner);
        }
        for (std::size_t c = 0; c < n_snap; ++c) {
            const Eigen::VectorXcd ket = mean_side[0].col(static_cast<Eigen::Index>(c));
            const Eigen::VectorXcd bra = mean_side[1].col(static_cast<Eigen::Index>(c));
            samples[c][o] = 0.5 * (ket * bra.adjoint() + bra * ket.adjoint());
        }
    });

    DensityEstimate est;
    est.rho.reserve(n_snap);
    est.se.reserve(n_snap);
    for (std::size_t c = 0; c < n_snap; ++c) {
        const double t = grid.dt * static_cast<double>(snapshot_steps[c]);
        Eigen::MatrixXcd mean = pairwise_sum(std::span<const Eigen::MatrixXcd>(samples[c]))
                                / static_cast<double>(spec.n_outer);
        Eigen::MatrixXd var = Eigen::MatrixXd::Zero(d, d);
        std::vector<double> tr(spec.n_outer);
        for (std::size_t o = 0; o < spec.n_outer; ++o) {
            var += (samples[c][o] - mean).cwiseAbs2();
            tr[o] = samples[c][o].trace().real();
        }
        var /= static_cast<double>(spec.n_outer - 1);
        est.se.push_back((var / static_cast<double>(spec.n_outer)).cwiseSqrt());
        const double tr_mean = pairwise_sum(std::span<const double>(tr)) / static_cast<double>(spec.n_outer);
        double tr_var = 0.0;
        for (double v : tr) tr_var += (v - tr_mean) * (v - tr_mean);
        tr_var /= static_cast<double>(spec.n_outer - 1);
        est.trace_se.push_back(std::sqrt(tr_var / static_cast<double>(spec.n_outer)));
        est.rho.emplace_back(std::move(mean), t);
        est.times.push_back(t);
    }
    return est;
}

} // namespace decolab::sse
