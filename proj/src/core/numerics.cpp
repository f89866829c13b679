#include "qphase/numerics.hpp"
#include "qphase/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qphase {
namespace odeint = boost::numeric::odeint;

namespace {

double state_norm(const State2& y) { return std::sqrt(std::norm(y[0]) + std::norm(y[1])); }

using Stepper = odeint::runge_kutta_dopri5<State2>;
using Checker = odeint::default_error_checker<double, Stepper::algebra_type,
                                              Stepper::operations_type>;
using Controlled = odeint::controlled_runge_kutta<Stepper, Checker>;
using Dense = odeint::dense_output_runge_kutta<Controlled>;

Trajectory finite_or_throw(Trajectory out) {
    for (const auto& s : out.states)
        if (!std::isfinite(s[0].real()) || !std::isfinite(s[0].imag()) ||
            !std::isfinite(s[1].real()) || !std::isfinite(s[1].imag()))
            throw NumericError("integrate_ode produced non-finite state");
    return out;
}

} // namespace

Trajectory integrate_ode(const Rhs& rhs, const State2& y0, double t0, double t1, double tol,
                         const std::vector<double>& sample_times, NormPolicy policy) {
    if (!(tol >= 1e-12 && tol <= 1e-4))
        throw DomainError("integrate_ode tol must lie in [1e-12, 1e-4]");
    const double n0 = state_norm(y0);
    if (t1 == t0) {
        Trajectory out;
        out.times.push_back(t0);
        out.states.push_back(y0);
        return out;
    }
    if (!(t1 > t0)) throw DomainError("integrate_ode requires t1 >= t0");

    auto attempt = [&](double step_tol) {
        Trajectory out;
        // err = |x_err| / (eps_abs + step_tol * dt * |dxdt|): error per unit time
        Dense dense(Controlled(Checker(1e-3 * step_tol, step_tol, 0.0, 1.0)));
        State2 y = y0;
        auto system = [&rhs](const State2& x, State2& dxdt, double t) { rhs(x, dxdt, t); };
        auto observe = [&](const State2& x, double t) {
            out.times.push_back(t);
            out.states.push_back(x);
            out.max_norm_drift = std::max(out.max_norm_drift, std::abs(state_norm(x) - n0));
        };
        const double dt0 = std::min(1e-3, (t1 - t0) * 1e-3);
        try {
            if (sample_times.empty()) {
                out.steps = odeint::integrate_adaptive(dense, system, y, t0, t1, dt0, observe);
            } else {
                std::vector<double> ts = sample_times;
                if (!std::is_sorted(ts.begin(), ts.end()) || ts.front() < t0 || ts.back() > t1)
                    throw DomainError("sample times must be sorted within [t0, t1]");
                if (ts.front() > t0) ts.insert(ts.begin(), t0);
                out.steps = odeint::integrate_times(dense, system, y, ts.begin(), ts.end(), dt0,
                                                    observe);
                if (sample_times.front() > t0) {
                    out.times.erase(out.times.begin());
                    out.states.erase(out.states.begin());
                }
            }
        } catch (const odeint::step_adjustment_error& e) {
            std::ostringstream msg;
            msg << "integrate_ode step underflow near t=" << (out.times.empty() ? t0 : out.times.back())
                << " (" << e.what() << "); reduce the switching rate or loosen tol";
            throw StiffnessError(msg.str());
        }
        return out;
    };

    // Norm error accumulates over long spans; tighten the step tolerance until it stays
    // within 10 tol.
    Trajectory out = attempt(tol);
    if (policy == NormPolicy::free) return finite_or_throw(std::move(out));
    double step_tol = tol;
    for (int retry = 0; retry < 4 && out.max_norm_drift > 10.0 * tol; ++retry) {
        step_tol *= std::max(1e-3, 0.5 * 10.0 * tol / out.max_norm_drift);
        out = attempt(step_tol);
    }
    if (out.max_norm_drift > 10.0 * tol) {
        std::ostringstream msg;
        msg << "integrate_ode norm drift " << out.max_norm_drift << " exceeds 10 tol = " << 10.0 * tol;
        throw StiffnessError(msg.str());
    }
    return finite_or_throw(std::move(out));
}

namespace {

// Boost's tolerance is relative to the L1 norm; a cheap single-rule pass converts ours.
// Targets below a few ulps only drive the recursion to its depth limit.
constexpr unsigned quad_depth = 15;
constexpr double rel_floor = 4e-15;

template <class T>
T adaptive_gk(const std::function<T(double)>& fn, double a, double b, double tol, double& err) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double l1 = 0.0;
    T v = GK::integrate(fn, a, b, 0, 0.0, &err, &l1);
    if (err <= tol) return v;
    const double rel = std::max(rel_floor, tol / std::max(l1, 1e-300));
    return GK::integrate(fn, a, b, quad_depth, rel, &err, &l1);
}

} // namespace

QuadResult quad(const std::function<double(double)>& fn, double a, double b, double tol) {
    if (!(tol > 0.0)) throw DomainError("quad tol must be > 0");
    if (a == b) return {};
    double err = 0.0;
    const double v = adaptive_gk<double>(fn, a, b, tol, err);
    if (!std::isfinite(v)) throw NumericError("quad: non-finite integrand");
    if (err > tol) {
        std::ostringstream msg;
        msg << "quad did not converge on [" << a << ", " << b << "]: error estimate " << err
            << " > tol " << tol;
        throw QuadratureError(msg.str(), v, err);
    }
    return {v, err};
}

QuadResultC quad_complex(const std::function<cplx(double)>& fn, double a, double b, double tol) {
    if (!(tol > 0.0)) throw DomainError("quad tol must be > 0");
    if (a == b) return {};
    double err = 0.0;
    const cplx v = adaptive_gk<cplx>(fn, a, b, tol, err);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NumericError("quad_complex: non-finite integrand");
    if (err > tol) {
        std::ostringstream msg;
        msg << "quad_complex did not converge on [" << a << ", " << b << "]: error estimate "
            << err << " > tol " << tol;
        throw QuadratureError(msg.str(), std::abs(v), err);
    }
    return {v, err};
}

double find_root(const std::function<double(double)>& fn, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw DomainError("find_root tol must be > 0");
    if (lo > hi) std::swap(lo, hi);
    const double flo = fn(lo), fhi = fn(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi))
        throw DomainError("find_root: non-finite value at bracket end");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) {
        std::ostringstream msg;
        msg << "find_root: no sign change on [" << lo << ", " << hi << "] (f=" << flo << ", "
            << fhi << ")";
        throw BracketError(msg.str());
    }
    auto done = [tol](double x0, double x1) {
        return std::abs(x1 - x0) <= tol * std::max(1.0, std::min(std::abs(x0), std::abs(x1)));
    };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, done, iters);
    return std::abs(fn(r.first)) <= std::abs(fn(r.second)) ? r.first : r.second;
}

} // namespace qphase
