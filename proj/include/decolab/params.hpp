// params.hpp — physical constants of the damped-oscillator model
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "decolab/core.hpp"

namespace decolab {

// hbar, m, omega0 and the friction constant a. Everything else is derived on
// access: epsilon = a/(2 omega0), sigma = sqrt(hbar/m), lambda = (1+i)/sqrt(2).
// The mass is fixed to 1 throughout.
struct ModelParams {
    double hbar = 1.0;
    double mass = 1.0;
    double omega0 = 1.0;
    double a = 0.2;

    double epsilon() const { return a / (2.0 * omega0); }
    double sigma() const { return std::sqrt(hbar / mass); }
    static Complex lambda() { return Complex(1.0, 1.0) / std::sqrt(2.0); }

    void validate() const {
        if (!(hbar > 0.0)) throw std::invalid_argument("ModelParams: hbar must be > 0");
        if (mass != 1.0) throw std::invalid_argument("ModelParams: mass is fixed to 1");
        if (!(omega0 > 0.0)) throw std::invalid_argument("ModelParams: omega0 must be > 0");
        if (!(a >= 0.0)) throw std::invalid_argument("ModelParams: friction a must be >= 0");
    }
};

} // namespace decolab
