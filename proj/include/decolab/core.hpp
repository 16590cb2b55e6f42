// core.hpp — shared scalar types, error types, reductions, Monte Carlo estimates
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace decolab {

#define DECOLAB_VERSION "0.1.0"

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Thrown when an SDE path leaves the representable range.
class numerical_blowup_error : public std::runtime_error {
public:
    numerical_blowup_error(const std::string& what, std::size_t step, double time, double norm)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", t=" + std::to_string(time)
                             + ", |state|=" + std::to_string(norm)),
          step_(step), time_(time), norm_(norm) {}
    std::size_t step() const { return step_; }
    double time() const { return time_; }
    double state_norm() const { return norm_; }
private:
    std::size_t step_;
    double time_;
    double norm_;
};

// Thrown when an explicit stepper is asked to run outside its stability bound.
class step_size_error : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a density-matrix integration breaches its invariants.
class integration_failure : public std::runtime_error {
public:
    integration_failure(const std::string& what, std::size_t step, double time)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", t=" + std::to_string(time)),
          step_(step), time_(time) {}
    std::size_t step() const { return step_; }
    double time() const { return time_; }
private:
    std::size_t step_;
    double time_;
};

// Pairwise (cascade) summation over a canonically ordered buffer. Estimators
// reduce through this so results do not depend on how work was scheduled.
template <typename T>
T pairwise_sum(std::span<const T> xs) {
    const std::size_t n = xs.size();
    if (n == 0) return T{};
    if (n <= 8) {
        T acc = xs[0];
        for (std::size_t i = 1; i < n; ++i) acc += xs[i];
        return acc;
    }
    const std::size_t half = n / 2;
    T a = pairwise_sum(xs.subspan(0, half));
    T b = pairwise_sum(xs.subspan(half));
    return a + b;
}

template <typename T>
T pairwise_sum(const std::vector<T>& xs) {
    return pairwise_sum(std::span<const T>(xs));
}

// Mean with standard error for a complex-valued Monte Carlo sample. The
// jackknife estimate (20 blocks) flags samples whose variance estimate is
// itself unstable, which happens for heavy-tailed path functionals.
struct MCEstimate {
    Complex mean{0.0, 0.0};
    double se = 0.0;            // sqrt(Var_re + Var_im)/sqrt(n)
    double jackknife_se = 0.0;
    std::size_t n = 0;
    bool heavy_tail_flag = false;
};

inline MCEstimate mc_estimate(std::span<const Complex> samples) {
    MCEstimate est;
    est.n = samples.size();
    if (est.n == 0) return est;
    est.mean = pairwise_sum(samples) / static_cast<double>(est.n);
    if (est.n < 2) return est;

    std::vector<double> dev(est.n);
    for (std::size_t i = 0; i < est.n; ++i) dev[i] = std::norm(samples[i] - est.mean);
    const double var = pairwise_sum(std::span<const double>(dev)) / static_cast<double>(est.n - 1);
    est.se = std::sqrt(var / static_cast<double>(est.n));

    const std::size_t nblocks = std::min<std::size_t>(20, est.n);
    std::vector<Complex> block_means(nblocks, Complex{});
    std::vector<std::size_t> counts(nblocks, 0);
    for (std::size_t i = 0; i < est.n; ++i) {
        block_means[i % nblocks] += samples[i];
        ++counts[i % nblocks];
    }
    Complex total = pairwise_sum(std::span<const Complex>(block_means));
    double jk = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        const Complex loo = (total - block_means[b]) / static_cast<double>(est.n - counts[b]);
        jk += std::norm(loo - est.mean);
    }
    jk *= static_cast<double>(nblocks - 1) / static_cast<double>(nblocks);
    est.jackknife_se = std::sqrt(jk);
    est.heavy_tail_flag = est.se > 0 && est.jackknife_se > 1.5 * est.se;
    return est;
}

inline MCEstimate mc_estimate(const std::vector<Complex>& samples) {
    return mc_estimate(std::span<const Complex>(samples));
}

// Index-parallel loop; each index owns its output slot, so the result is
// independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned nt = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace decolab
