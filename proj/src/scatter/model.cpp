#include "qphase/errors.hpp"
#include "qphase/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qphase::scatter {
namespace {

double envelope_exponent(const ScatteringModel& m, double x) {
    const double c = m.packet_center();
    if (m.packet_shape == PacketShape::gaussian) {
        const double sigma = m.W / (2.0 * std::sqrt(2.0 * std::log(2.0)));
        const double u = (x - c) / sigma;
        return -0.25 * u * u;
    }
    const double n = static_cast<double>(m.flat_top_order);
    const double s = 0.5 * m.W / std::pow(0.5 * std::log(2.0), 1.0 / n);
    return -std::pow(std::abs((x - c) / s), n);
}

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
}

} // namespace

std::vector<std::string> ScatteringModel::validate() const {
    std::vector<std::string> warnings;
    if (!(alpha_tilde > 0.0) || !std::isfinite(alpha_tilde))
        throw ConfigError("alpha_tilde must be finite and > 0");
    if (!(L > 0.0) || !(W > 0.0) || !(p0 > 0.0) || !(mass > 0.0))
        throw ConfigError("L, W, p0 and mass must be > 0");
    if (W < 10.0 * L) {
        if (!relax_validation)
            throw ConfigError("W >= 10L rule violated: W=" + fmt(W) + ", L=" + fmt(L) +
                              " (use --override-validation to proceed)");
        warnings.push_back("W < 10L: packet is not wide compared with the branch separation");
    }
    const double wmax = std::min(1.0 / (10.0 * p0), L / 50.0);
    if (!(delta_width > 0.0) || delta_width > wmax * (1.0 + 1e-12))
        throw ConfigError("delta_width must lie in (0, min(1/(10 p0), L/50)] = (0, " + fmt(wmax) +
                          "]");
    if (flat_top_order < 2 || flat_top_order % 2 != 0)
        throw ConfigError("flat_top_order must be an even integer >= 2");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (dt * p0 * p0 / (2.0 * mass) > 0.05) {
        if (!relax_validation)
            throw ConfigError("dt * p0^2 / 2m must be <= 0.05, got " + fmt(dt * p0 * p0 / (2.0 * mass)) +
                              " (use --override-validation to proceed)");
        warnings.push_back("dt * p0^2 / 2m > 0.05: time step resolves the carrier phase poorly");
    }
    if (!(mask_fraction >= 0.1 && mask_fraction < 0.5))
        throw ConfigError("mask_fraction must lie in [0.1, 0.5)");
    if (!(mask_strength > 0.0)) throw ConfigError("mask_strength must be > 0");
    if (grid.x_min() > -3.0 * W || grid.x_max() < L + 3.0 * W)
        throw ConfigError("grid must span [-3W, L+3W] = [" + fmt(-3.0 * W) + ", " +
                          fmt(L + 3.0 * W) + "]");
    const double dx = grid.dx();
    if (dx > 0.5 * delta_width)
        throw ConfigError("grid too coarse for the delta regularisation: dx=" + fmt(dx) +
                          " > delta_width/2");
    const double cells = L / dx;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
        throw ConfigError("L must be an integer number of grid cells so V2 is a lattice translate of V1");
    const double origin = -grid.x_min() / dx;
    if (std::abs(origin - std::round(origin)) > 1e-9 * std::max(1.0, origin))
        throw ConfigError("x = 0 must lie on a grid node");
    if (barrier_L1) {
        const double L1 = *barrier_L1;
        if (!(L1 > 0.0 && L1 < L)) throw ConfigError("barrier_L1 must lie in (0, L)");
        if (wall_cells < 1) throw ConfigError("wall_cells must be >= 1");
        const double height = wall_height_factor * p0 * p0 / (2.0 * mass);
        const double kappa = std::sqrt(std::max(0.0, 2.0 * mass * height - p0 * p0));
        if (kappa * dx > 0.5)
            throw ConfigError("hard wall too high for the grid: kappa*dx=" + fmt(kappa * dx) +
                              " > 0.5 leaves the evanescent tail unresolved");
    }
    const double x_edge = -3.0 * delta_width;
    if (envelope_exponent(*this, x_edge) > -18.4)
        throw ConfigError("margin too small: the initial packet overlaps the barrier support");
    const double x_left = grid.x_min() + mask_fraction * (grid.x_max() - grid.x_min());
    if (envelope_exponent(*this, x_left) > -18.4)
        throw ConfigError("initial packet reaches the absorbing layer; enlarge the grid");
    return warnings;
}

Grid1D default_grid(double L, double W, int cells_per_L, double margin) {
    if (cells_per_L < 1) throw ConfigError("cells_per_L must be >= 1");
    const double dx = L / cells_per_L;
    // room for the reflected packet at the default t_final
    const double reach = std::max(3.0 * W, W + 4.0 * margin + 2.0 * L);
    const double need = (2.0 * reach + L) / dx;
    std::size_t n = 16;
    while (static_cast<double>(n) < need) n *= 2;
    const auto left = static_cast<long long>((static_cast<long long>(n) - cells_per_L) / 2);
    const double x_min = -static_cast<double>(left) * dx;
    return Grid1D::make(x_min, x_min + static_cast<double>(n) * dx, n);
}

ScatteringModel acceptance_model(double W, int cells_per_L) {
    ScatteringModel m;
    m.W = W;
    m.grid = default_grid(m.L, W, cells_per_L, m.margin);
    return m;
}

std::vector<double> delta_bump(const Grid1D& grid, double center, double width, double area) {
    std::vector<double> v(grid.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = (grid.x(i) - center) / width;
        if (std::abs(u) < 1.0) {
            v[i] = (1.0 + std::cos(pi * u)) / (2.0 * width);
            sum += v[i];
        }
    }
    if (!(sum > 0.0)) throw ConfigError("delta bump not resolved by the grid");
    const double scale = area / (sum * grid.dx());
    for (auto& x : v) x *= scale;
    return v;
}

BranchPotentials build_branch_potentials(const ScatteringModel& model) {
    const auto& g = model.grid;
    BranchPotentials p;
    p.V1 = delta_bump(g, 0.0, model.delta_width, model.alpha());
    const auto shift = static_cast<std::size_t>(std::llround(model.L / g.dx()));
    p.V2.assign(g.size(), 0.0);
    for (std::size_t i = shift; i < g.size(); ++i) p.V2[i] = p.V1[i - shift];
    p.wall.assign(g.size(), 0.0);
    if (model.barrier_L1) {
        const double height = model.wall_height_factor * model.p0 * model.p0 / (2.0 * model.mass);
        const double ramp = model.wall_cells * g.dx();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double xi = (g.x(i) - *model.barrier_L1) / ramp;
            if (xi <= 0.0) continue;
            const double s = xi >= 1.0 ? 1.0 : std::pow(std::sin(0.5 * pi * xi), 2);
            p.wall[i] = height * s;
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            p.V1[i] += p.wall[i];
            p.V2[i] += p.wall[i];
        }
    }
    return p;
}

ComplexField initial_packet(const ScatteringModel& model) {
    ComplexField f(model.grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double x = model.grid.x(i);
        f.values[i] = std::exp(envelope_exponent(model, x)) * std::polar(1.0, model.p0 * x);
    }
    const double n = std::sqrt(f.norm2());
    for (auto& v : f.values) v /= n;
    return f;
}

double measured_fwhm(const ComplexField& field) {
    const auto& v = field.values;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::norm(v[i]) > std::norm(v[imax])) imax = i;
    const double half = 0.5 * std::norm(v[imax]);
    std::size_t lo = imax, hi = imax;
    while (lo > 0 && std::norm(v[lo - 1]) >= half) --lo;
    while (hi + 1 < v.size() && std::norm(v[hi + 1]) >= half) ++hi;
    auto cross = [&](std::size_t inside, std::size_t outside) {
        const double a = std::norm(v[inside]), b = std::norm(v[outside]);
        const double f = (a - half) / (a - b);
        return field.grid.x(inside) + f * (field.grid.x(outside) - field.grid.x(inside));
    };
    const double left = lo > 0 ? cross(lo, lo - 1) : field.grid.x(0);
    const double right = hi + 1 < v.size() ? cross(hi, hi + 1) : field.grid.x(v.size() - 1);
    return right - left;
}

} // namespace qphase::scatter
