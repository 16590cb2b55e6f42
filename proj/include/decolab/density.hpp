// density.hpp — truncated energy-basis density matrix with invariant checks
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <stdexcept>

#include "decolab/core.hpp"

namespace decolab {

struct FockDensityMatrix {
    std::size_t dim = 0;
    Eigen::MatrixXcd rho;
    double time = 0.0;

    FockDensityMatrix() = default;
    FockDensityMatrix(Eigen::MatrixXcd m, double t = 0.0)
        : dim(static_cast<std::size_t>(m.rows())), rho(std::move(m)), time(t) {
        if (rho.rows() != rho.cols())
            throw std::invalid_argument("FockDensityMatrix: matrix must be square");
    }

    Complex trace() const { return rho.trace(); }

    double hermiticity_error() const {
        return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                           Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    // Tolerances for states evolved under the master-equation flow.
    static constexpr double kHermTol = 1e-12;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kPositivityTol = -1e-8;
};

} // namespace decolab
