#include "qphase/dipole.hpp"

#include "qphase/errors.hpp"
#include "qphase/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

namespace qphase::dipole {

struct TabulatedCoupling {
    double z_min = 0.0;
    double z_max = 0.0;
    boost::math::interpolators::pchip<std::vector<double>> spline;
};

namespace {

// Quintic smoothstep on u in [0, 1] and its derivative.
double smooth(double u) { return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); }
double smooth_prime(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

double mask(const DipoleModel& m, double z, double* deriv) {
    const double r = m.cage_radius;
    const double d = std::abs(z - m.z1);
    if (r <= 0.0) {
        if (deriv) *deriv = 0.0;
        return d == 0.0 ? 0.0 : 1.0;
    }
    const double u = std::clamp((d - r) / r, 0.0, 1.0);
    if (deriv) {
        const double sgn = z >= m.z1 ? 1.0 : -1.0;
        *deriv = (u > 0.0 && u < 1.0) ? smooth_prime(u) * sgn / r : 0.0;
    }
    return smooth(u);
}

double raw_f(const DipoleModel& m, double z, double* deriv) {
    if (m.kind == CouplingKind::power_law) {
        if (z == 0.0) throw DomainError("coupling profile is singular at z = 0");
        if (deriv) *deriv = -2.0 * m.charge / (z * z * z);
        return m.charge / (z * z);
    }
    if (!m.table) throw ConfigError("tabulated coupling has no table");
    const auto& t = *m.table;
    if (z < t.z_min || z > t.z_max) throw DomainError("z outside the tabulated coupling range");
    if (deriv) *deriv = t.spline.prime(z);
    return t.spline(z);
}

} // namespace

void DipoleModel::set_table(std::vector<double> z, std::vector<double> f) {
    if (z.size() < 4 || z.size() != f.size())
        throw ConfigError("tabulated coupling needs >= 4 matching (z, f) pairs");
    for (std::size_t i = 1; i < z.size(); ++i)
        if (!(z[i] > z[i - 1])) throw ConfigError("tabulated z must be strictly increasing");
    const double lo = z.front(), hi = z.back();
    table = std::make_shared<const TabulatedCoupling>(
        TabulatedCoupling{lo, hi, boost::math::interpolators::pchip<std::vector<double>>(
                                      std::move(z), std::move(f))});
    kind = CouplingKind::tabulated;
}

double DipoleModel::f(double z) const { return raw_f(*this, z, nullptr) * mask(*this, z, nullptr); }

double DipoleModel::df(double z) const {
    double dr = 0.0, dm = 0.0;
    const double r = raw_f(*this, z, &dr);
    const double m = mask(*this, z, &dm);
    return dr * m + r * dm;
}

std::vector<std::string> DipoleModel::validate() const {
    std::vector<std::string> warn;
    if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
    if (z1 == z2) throw ConfigError("z1 and z2 must differ");
    if (cage_radius < 0.0) throw ConfigError("cage_radius must be >= 0");
    if (2.0 * cage_radius >= std::abs(z2 - z1))
        throw ConfigError("cage mask around z1 reaches z2; reduce cage_radius");
    if (kind == CouplingKind::power_law && z1 * z2 <= 0.0)
        throw ConfigError("path from z1 to z2 crosses the z = 0 singularity");
    if (!(tol >= 1e-12 && tol <= 1e-4)) throw ConfigError("tol must lie in [1e-12, 1e-4]");
    if (f(z1) != 0.0) throw ConfigError("grounded cage must give f(z1) = 0");
    const double f2 = f(z2);
    if (!(f2 > 0.0) || !std::isfinite(f2)) throw ConfigError("f(z2) must be finite and > 0");
    const double strength = beta * schedule.g0 * f2;
    if (strength > 10.0 * alpha || strength < 0.1 * alpha)
        warn.push_back("g(0) f(z2) is not within a factor of 10 of alpha");
    if (schedule.adiabaticity(alpha) < 10.0) warn.push_back("alpha / eps < 10: weakly adiabatic");
    if (second) {
        if (!(second->alpha > 0.0) || !(second->beta > 0.0))
            throw ConfigError("second dipole alpha and beta must be > 0");
    }
    return warn;
}

std::vector<double> DipoleModel::path_breaks() const {
    const double dir = z2 > z1 ? 1.0 : -1.0;
    std::vector<double> b{z1};
    for (double k : {1.0, 2.0}) {
        const double z = z1 + dir * k * cage_radius;
        if (cage_radius > 0.0 && (z - z1) * dir < (z2 - z1) * dir) b.push_back(z);
    }
    b.push_back(z2);
    return b;
}

double path_quad(const DipoleModel& model, const std::function<double(double)>& fn, double tol) {
    const auto b = model.path_breaks();
    double acc = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) acc += quad(fn, b[i - 1], b[i], tol).value;
    return acc;
}

cplx path_quad_complex(const DipoleModel& model, const std::function<cplx(double)>& fn, double tol) {
    const auto b = model.path_breaks();
    cplx acc;
    for (std::size_t i = 1; i < b.size(); ++i) acc += quad_complex(fn, b[i - 1], b[i], tol).value;
    return acc;
}

DipoleModel acceptance_dipole(double eps, double plateau) {
    DipoleModel m;
    m.alpha = 1.0;
    m.beta = 1.0;
    m.z1 = 1.0;
    m.z2 = 2.0;
    m.charge = 4.0;
    m.cage_radius = 0.1;
    m.schedule = SwitchingSchedule::make(1.0, eps, 0.0, plateau);
    return m;
}

State2 ground_vector(double alpha, double b) {
    const double w = std::hypot(alpha, b);
    const double u = alpha + w;
    const double n = std::hypot(b, u);
    return {cplx(-b / n, 0.0), cplx(u / n, 0.0)};
}

double bo_force(const DipoleModel& model, double z, double t) {
    const double g = model.beta * model.schedule.g(t);
    if (g == 0.0) return 0.0;
    const double s3 = oracle::bo_polarization(model.alpha, g, model.f(z));
    return -g * s3 * model.df(z);
}

PotentialDifference private_potential_difference(const DipoleModel& model, double t) {
    PotentialDifference r;
    const double g = model.beta * model.schedule.g(t);
    const double b = g * model.f(model.z2);
    r.closed_form = -b * b / (model.alpha + std::hypot(model.alpha, b));
    if (g == 0.0) return r;
    const double scale = std::max(std::abs(r.closed_form), 1e-300);
    r.quadrature = -path_quad(model, [&](double z) { return bo_force(model, z, t); }, 1e-11 * scale);
    r.rel_gap = std::abs(r.quadrature - r.closed_form) / scale;
    return r;
}

PublicPotential public_potential_test(const DipoleModel& model, double z0, double epsilon,
                                      double z_t, double t) {
    if (!(epsilon > 0.0)) throw DomainError("public_potential_test needs epsilon > 0");
    PublicPotential r;
    const double g = model.beta * model.schedule.g(t);
    const double f0 = model.f(z0);
    const double ft = model.f(z_t);
    r.first_order = g * oracle::bo_polarization(model.alpha, g, f0) * ft;
    const double e0 = oracle::bo_ground_energy(model.alpha, g, f0);
    const double e1 = oracle::bo_ground_energy(model.alpha, g, f0 + epsilon * ft);
    r.exact_shift = (e1 - e0) / epsilon;
    r.gap = e1 - e0 - epsilon * r.first_order;
    return r;
}

EnergyCheck perturbation_energy_check(const DipoleModel& model, double z, double dz, double t) {
    EnergyCheck r;
    if (dz == 0.0) return r;
    const double g = model.beta * model.schedule.g(t);
    r.dE_exact = oracle::bo_ground_energy(model.alpha, g, model.f(z + dz)) -
                 oracle::bo_ground_energy(model.alpha, g, model.f(z));
    r.dE_force = -bo_force(model, z, t) * dz;
    return r;
}

double wrap_phase(double a) {
    a = std::remainder(a, 2.0 * pi);
    return a <= -pi ? a + 2.0 * pi : a;
}

} // namespace qphase::dipole
