#include "qphase/errors.hpp"
#include "qphase/numerics.hpp"
#include "qphase/oracle.hpp"
#include "qphase/scatter.hpp"

#include <cmath>

namespace qphase::scatter {

StationaryResult stationary_scatter(double alpha_tilde, double p, double width) {
    if (!(alpha_tilde > 0.0) || !(p > 0.0) || !(width > 0.0))
        throw DomainError("stationary_scatter: arguments must be > 0");
    const cplx I(0.0, 1.0);
    // u = w - x runs across the bump from the transmitted side; state (psi, dpsi/du)
    auto rhs = [&](const State2& y, State2& dy, double u) {
        const double x = width - u;
        const double bump = std::abs(x) < width ? (1.0 + std::cos(pi * x / width)) / (2.0 * width)
                                                : 0.0;
        dy[0] = y[1];
        dy[1] = (alpha_tilde * bump - p * p) * y[0];
    };
    const cplx e = std::exp(I * p * width);
    const State2 y0{e, -I * p * e};
    const auto traj = integrate_ode(rhs, y0, 0.0, 2.0 * width, 1e-12, {2.0 * width},
                                    NormPolicy::free);
    const cplx psi = traj.states.back()[0];
    const cplx dpsi = -traj.states.back()[1];
    const double x = -width;
    const cplx a = 0.5 * (psi + dpsi / (I * p)) * std::exp(-I * p * x);
    const cplx b = 0.5 * (psi - dpsi / (I * p)) * std::exp(I * p * x);
    return {b / a, 1.0 / a, width};
}

RegularizationStudy regularization_study(double alpha_tilde, double p, double w0) {
    RegularizationStudy s;
    s.w0 = w0;
    s.at_w0 = stationary_scatter(alpha_tilde, p, w0);
    s.at_half = stationary_scatter(alpha_tilde, p, 0.5 * w0);
    s.at_quarter = stationary_scatter(alpha_tilde, p, 0.25 * w0);
    auto extrap = [](cplx f0, cplx f1, cplx f2) {
        const cplx r0 = 2.0 * f1 - f0;
        const cplx r1 = 2.0 * f2 - f1;
        return (4.0 * r1 - r0) / 3.0;
    };
    s.A_extrapolated = extrap(s.at_w0.A, s.at_half.A, s.at_quarter.A);
    s.B_extrapolated = extrap(s.at_w0.B, s.at_half.B, s.at_quarter.B);
    const auto exact = oracle::delta_coeffs(alpha_tilde, p);
    s.A_rel_error_w0 = std::abs(s.at_w0.A - exact.A) / std::abs(exact.A);
    s.B_rel_error_w0 = std::abs(s.at_w0.B - exact.B) / std::abs(exact.B);
    s.A_rel_error_extrapolated = std::abs(s.A_extrapolated - exact.A) / std::abs(exact.A);
    s.B_rel_error_extrapolated = std::abs(s.B_extrapolated - exact.B) / std::abs(exact.B);
    s.accepted = s.A_rel_error_w0 < 0.01;
    return s;
}

} // namespace qphase::scatter
