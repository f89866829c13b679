#include "qphase/dipole.hpp"

#include "qphase/errors.hpp"
#include "qphase/oracle.hpp"

#include <cmath>

namespace qphase::dipole {
namespace {

struct Pair {
    double a1, b1, a2, b2;

    double eps1(double gf) const { return std::hypot(a1, b1 * gf); }
    double eps2(double gf) const { return std::hypot(a2, b2 * gf); }
    // beta1 <s3^1>_ground + beta2 <s3^2>_excited
    double polarization(double gf) const {
        return -b1 * b1 * gf / eps1(gf) + b2 * b2 * gf / eps2(gf);
    }
    double u_bo(double gf) const { return -eps1(gf) + eps2(gf); }
};

} // namespace

TwoDipoleReport two_dipole_experiment(const DipoleModel& model) {
    if (!model.second) throw ConfigError("two_dipole_experiment needs a second dipole");
    if (model.second->initial != DipoleState::excited)
        throw DomainError("dipole 2 must be prepared in the excited state");
    model.validate();
    const Pair p{model.alpha, model.beta, model.second->alpha, model.second->beta};
    const auto bal = oracle::two_dipole_balance(p.a1, p.a2, p.b1, p.b2);
    TwoDipoleReport r;
    r.dU_closed_form = bal.dU;
    const double g0 = model.schedule.g0;
    if (bal.any_X) {
        r.z_balance = model.z2;
        r.gf_balance = g0 * model.f(model.z2);
        return r;
    }
    // beta1^2 eps2 - beta2^2 eps1 along the path away from z1, at plateau strength
    auto h = [&](double z) {
        const double gf = g0 * model.f(z);
        return p.b1 * p.b1 * p.eps2(gf) - p.b2 * p.b2 * p.eps1(gf);
    };
    const double dir = model.z2 > model.z1 ? 1.0 : -1.0;
    const double start = model.z1 + dir * 2.0 * model.cage_radius;
    const double span = 20.0 * std::abs(model.z2 - model.z1);
    const int n = 400;
    double lo = start, hlo = h(lo);
    bool found = false;
    double hi = lo;
    for (int i = 1; i <= n; ++i) {
        const double z = start + dir * span * i / n;
        double hz;
        try {
            hz = h(z);
        } catch (const DomainError&) {
            break;
        }
        if ((hz > 0.0) != (hlo > 0.0) || hz == 0.0) {
            hi = z;
            found = true;
            break;
        }
        lo = z;
        hlo = hz;
    }
    if (!found) throw BracketError("no balance point along the path from z1 for these dipoles");
    r.z_balance = find_root(h, std::min(lo, hi), std::max(lo, hi), 1e-15);
    r.gf_balance = g0 * model.f(r.z_balance);
    r.residual = std::abs(p.polarization(r.gf_balance));
    r.dU = p.u_bo(r.gf_balance) - p.u_bo(g0 * model.f(model.z1));
    r.off_plateau_residual = std::abs(p.polarization(0.5 * r.gf_balance));
    r.balance_fails_off_plateau = r.off_plateau_residual > 1e3 * std::max(r.residual, 1e-15);
    return r;
}

} // namespace qphase::dipole
