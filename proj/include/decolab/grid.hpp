// grid.hpp — uniform time grid and complex paths sampled on it
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>

#include "decolab/core.hpp"

namespace decolab {

// Uniform grid starting at t = 0. A grid with n_steps steps carries
// n_steps + 1 sample points, t_i = i*dt.
struct TimeGrid {
    double dt = 1e-3;
    std::size_t n_steps = 0;

    double time(std::size_t i) const { return static_cast<double>(i) * dt; }
    double total_time() const { return static_cast<double>(n_steps) * dt; }
    std::size_t n_points() const { return n_steps + 1; }

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    }

    bool operator==(const TimeGrid& o) const { return dt == o.dt && n_steps == o.n_steps; }
};

// One complex value per grid point (including t = 0).
struct ComplexTrajectory {
    TimeGrid grid;
    Eigen::VectorXcd values;

    ComplexTrajectory() = default;
    explicit ComplexTrajectory(const TimeGrid& g)
        : grid(g), values(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.n_points()))) {}

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }

    void check_consistent() const {
        if (size() != grid.n_points())
            throw std::invalid_argument("ComplexTrajectory: value count does not match grid");
    }
};

} // namespace decolab
