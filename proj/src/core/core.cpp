#include "qphase/core.hpp"
#include "qphase/errors.hpp"

#include <cmath>
#include <string>

namespace qphase {

UnitSystem UnitSystem::make(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("mass_light must be > 0");
    return UnitSystem{m};
}

Grid1D Grid1D::make(double x_min, double x_max, std::size_t n) {
    if (n < 16 || (n & (n - 1)) != 0)
        throw ConfigError("grid n_points must be a power of two >= 16, got " + std::to_string(n));
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
        throw ConfigError("grid requires finite x_min < x_max");
    Grid1D g;
    g.x_min_ = x_min;
    g.x_max_ = x_max;
    g.n_ = n;
    return g;
}

double Grid1D::k(std::size_t i) const {
    const double dk = 2.0 * pi / (x_max_ - x_min_);
    const auto half = n_ / 2;
    return i < half ? dk * static_cast<double>(i)
                    : -dk * static_cast<double>(n_ - i);
}

double Grid1D::k_max() const { return pi / dx(); }

std::size_t Grid1D::index_of(double xv) const {
    const double r = std::round((xv - x_min_) / dx());
    if (r < 0.0) return 0;
    if (r >= static_cast<double>(n_)) return n_ - 1;
    return static_cast<std::size_t>(r);
}

double ComplexField::norm2() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return s * grid.dx();
}

bool ComplexField::finite() const {
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

SwitchingSchedule SwitchingSchedule::make(double g0, double eps, double t1, double t2) {
    if (!(g0 >= 0.0)) throw ConfigError("schedule g0 must be >= 0");
    if (!(eps > 0.0)) throw ConfigError("schedule eps must be > 0");
    if (!(t1 < t2)) throw ConfigError("schedule requires t1 < t2");
    SwitchingSchedule s;
    s.g0 = g0;
    s.eps = eps;
    s.t1 = t1;
    s.t2 = t2;
    return s;
}

double SwitchingSchedule::tau() const { return -std::log(cutoff) / eps; }

// Exponential ramps shifted down by the cutoff value so g is continuous at t1', t2'.
double SwitchingSchedule::g(double t) const {
    if (t <= t_on() || t >= t_off()) return 0.0;
    const double scale = g0 / (1.0 - cutoff);
    if (t < t1) return scale * (std::exp(eps * (t - t1)) - cutoff);
    if (t > t2) return scale * (std::exp(-eps * (t - t2)) - cutoff);
    return g0;
}

double SwitchingSchedule::dg(double t) const {
    if (t <= t_on() || t >= t_off()) return 0.0;
    const double scale = g0 / (1.0 - cutoff);
    if (t < t1) return scale * eps * std::exp(eps * (t - t1));
    if (t > t2) return -scale * eps * std::exp(-eps * (t - t2));
    return 0.0;
}

} // namespace qphase
