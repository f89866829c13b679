#include "qphase/dipole.hpp"

#include "qphase/errors.hpp"
#include "qphase/oracle.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace qphase::dipole {
namespace {

using GL = boost::math::quadrature::gauss<double, 10>;
using GLs = boost::math::quadrature::gauss<double, 5>;
using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

SwitchingSchedule effective_schedule(const DipoleModel& m) {
    SwitchingSchedule s = m.schedule;
    s.g0 *= m.beta;
    return s;
}

} // namespace

Sigma3Coefficients heisenberg_sigma3(const DipoleModel& model, double z, double t) {
    const auto s = effective_schedule(model);
    const double fz = model.f(z);
    const double b = s.g(t) * fz;
    const double w = std::hypot(model.alpha, b);
    const double sin_t = b / w, cos_t = model.alpha / w;
    const double gamma = oracle::schedule_gamma(model.alpha, s, fz, t);
    return {sin_t, cos_t * std::sin(gamma), cos_t * std::cos(gamma)};
}

cplx inner_integral(const DipoleModel& model, double z, double t) {
    const auto s = effective_schedule(model);
    const double t0 = s.t_on();
    const double t_end = std::min(t, s.t_off());
    if (t_end <= t0) return {};
    const double fz = model.f(z);
    const double a = model.alpha;
    auto omega = [&](double u) { return std::hypot(a, s.g(u) * fz); };
    // panel grid depends on the model only, so the result is smooth in z
    double f_ref = std::abs(fz);
    for (double zb : model.path_breaks()) f_ref = std::max(f_ref, std::abs(model.f(zb)));
    auto omega_ref = [&](double u) { return std::hypot(a, s.g(u) * f_ref); };
    auto amp = [&](double u) {
        const double g = s.g(u);
        return g * a / std::hypot(a, g * fz);  // g cos(theta)
    };
    // Panels advance gamma by about pi / 2; breakpoints at the plateau edges.
    const std::array<double, 2> breaks{s.t1, s.t2};
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    cplx acc;
    double gamma = 0.0;
    double lo = t0;
    while (lo < t_end) {
        double hi = std::min(t_end, lo + 0.5 * pi / omega_ref(lo));
        for (double br : breaks)
            if (lo < br && br < hi) hi = br;
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        // nodes in ascending order; gamma accumulated node to node with a short rule
        std::array<double, 2 * 5> u{}, wt{};
        for (std::size_t k = 0; k < x.size(); ++k) {
            u[4 - k] = mid - half * x[k];
            u[5 + k] = mid + half * x[k];
            wt[4 - k] = wt[5 + k] = w[k];
        }
        cplx panel;
        double g_prev = gamma, u_prev = lo;
        for (std::size_t k = 0; k < u.size(); ++k) {
            g_prev += GLs::integrate(omega, u_prev, u[k]);
            u_prev = u[k];
            panel += wt[k] * amp(u[k]) * std::polar(1.0, g_prev);
        }
        acc += panel * half;
        gamma = g_prev + GLs::integrate(omega, u_prev, hi);
        lo = hi;
    }
    return acc;
}

UncertaintyIntegrals uncertainty_integrals(const DipoleModel& model, double t) {
    UncertaintyIntegrals r;
    if (t <= model.schedule.t_on()) return r;
    auto integrand = [&](double z) {
        const double d = model.df(z);
        if (d == 0.0) return cplx{};
        return -d * inner_integral(model, z, t);
    };
    // the inner sums carry ~1e-7 relative noise, so a tighter target only recurses
    const auto b = model.path_breaks();
    cplx res;
    for (std::size_t i = 1; i < b.size(); ++i) {
        double err = 0.0, l1 = 0.0;
        res += GK::integrate(integrand, b[i - 1], b[i], 12, 1e-6, &err, &l1);
        if (!std::isfinite(err) || err > 1e-4 * std::max(l1, 1e-12))
            throw QuadratureError("uncertainty z-integral did not converge", std::abs(res), err);
    }
    r.I2 = res.real();
    r.I3 = res.imag();
    r.delta_phi_sq = r.I2 * r.I2 + r.I3 * r.I3;
    r.delta_phi = std::sqrt(r.delta_phi_sq);
    return r;
}

StationaryPhaseCheck stationary_phase_check(const DipoleModel& model, double z, double t) {
    StationaryPhaseCheck c;
    const auto s = effective_schedule(model);
    const double fz = model.f(z);
    c.numeric = inner_integral(model, z, t);
    const auto sp = oracle::stationary_phase_I(model.alpha, s, fz, t);
    c.closed_form = sp.plus;
    const double mag = std::abs(c.closed_form);
    if (mag == 0.0) throw DomainError("stationary-phase value vanishes at this time");
    c.rel_gap = std::abs(c.numeric - c.closed_form) / mag;
    c.eps_over_omega = s.eps / sp.omega;
    c.constant = c.rel_gap / c.eps_over_omega;
    return c;
}

} // namespace qphase::dipole
