#pragma once

#include "qphase/core.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace qphase {

using State2 = std::array<cplx, 2>;
using Rhs = std::function<void(const State2& y, State2& dydt, double t)>;

struct Trajectory {
    std::vector<double> times;
    std::vector<State2> states;
    std::size_t steps = 0;
    double max_norm_drift = 0.0;
};

enum class NormPolicy { conserve, free };

// Dormand-Prince 5(4) with dense output; local error per unit time <= tol.
// With sample_times empty, every accepted step is recorded. NormPolicy::conserve (for
// Schroedinger right-hand sides) also holds the norm drift within 10 tol.
Trajectory integrate_ode(const Rhs& rhs, const State2& y0, double t0, double t1, double tol,
                         const std::vector<double>& sample_times = {},
                         NormPolicy policy = NormPolicy::conserve);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

struct QuadResultC {
    cplx value;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod (7/15); estimated absolute error <= tol.
QuadResult quad(const std::function<double(double)>& fn, double a, double b, double tol);
QuadResultC quad_complex(const std::function<cplx(double)>& fn, double a, double b, double tol);

// Bracketing root finder (TOMS 748).
double find_root(const std::function<double(double)>& fn, double lo, double hi, double tol);

} // namespace qphase
