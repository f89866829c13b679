#include "internal.hpp"

#include "qphase/errors.hpp"
#include "qphase/kernels.hpp"
#include "qphase/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qphase::scatter {
namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

double wrap(double a) {
    a = std::remainder(a, 2.0 * pi);
    return a <= -pi ? a + 2.0 * pi : a;
}

} // namespace

ProbeResult public_potential_probe(const ScatteringModel& model, double epsilon,
                                   double probe_position, ProbeBranch branch) {
    if (epsilon < 0.0) throw DomainError("public_potential_probe: epsilon must be >= 0");
    ProbeResult r;
    r.expected = epsilon / model.v0();
    r.weak_coupling_warning = epsilon > 0.1;
    const double reach = 3.0 * model.delta_width;
    if (std::abs(probe_position) < reach || std::abs(probe_position - model.L) < reach)
        throw ConfigError("probe position lies inside a barrier support");
    if (model.barrier_L1 && branch != ProbeBranch::none && probe_position > *model.barrier_L1)
        throw ConfigError("probe position lies inside the hard wall");
    if (epsilon == 0.0) return r;
    model.validate();

    const double rear = model.packet_center() - 0.5 * model.W - model.margin;
    const double t_final = (probe_position - rear + model.margin) / model.v0();
    const auto& grid = model.grid;
    const std::size_t probe = grid.index_of(probe_position);
    std::vector<double> times, rho;
    if (branch == ProbeBranch::none) {
        // free evolution is diagonal in k, so sum the exact modes at the probe point
        const auto nsteps = static_cast<std::size_t>(std::ceil(t_final / model.dt));
        for (std::size_t n = 0; n <= nsteps; ++n) times.push_back(static_cast<double>(n) * model.dt);
        rho = free_incident_density(model, times, 1.0, grid.x(probe));
    } else {
        const auto pots = build_branch_potentials(model);
        const auto& V = branch == ProbeBranch::branch1 ? pots.V1 : pots.V2;
        const auto run = detail::run_single(model, V, t_final, 1, probe);
        times = run.times;
        rho = run.probe_density;
    }
    r.phase = epsilon * trapezoid(times, rho);
    return r;
}

PathIntegralResult momentum_transfer_and_path_integral(const ScatteringModel& model,
                                                       const std::vector<double>& positions) {
    if (positions.empty()) throw DomainError("positions must not be empty");
    if (!std::is_sorted(positions.begin(), positions.end()) || positions.front() < 0.0 ||
        positions.back() > model.L)
        throw DomainError("positions must be sorted within [0, L]");
    PathIntegralResult out;
    out.warnings = model.validate();
    out.T = model.T();
    out.expected = 2.0 * model.p0 * model.L;
    const double v0 = model.v0();
    for (double x : positions) {
        const auto V = delta_bump(model.grid, x, model.delta_width, model.alpha());
        const double ts = (model.margin + x) / v0;
        const double tf = ts + 0.8 * out.T;
        const auto run = detail::run_single(model, V, tf, 5, model.grid.size());
        const double p_init = run.momentum.front();
        std::vector<double> tt, dp;
        for (std::size_t j = 0; j < run.times.size(); ++j) {
            const double t = run.times[j];
            if (t >= ts + 0.25 * out.T && t <= ts + 0.75 * out.T) {
                tt.push_back(t);
                dp.push_back(p_init - run.momentum[j]);
            }
        }
        if (tt.size() < 3) throw ConfigError("ramp window too short for a force fit; reduce dt");
        const double n = static_cast<double>(tt.size());
        const double mt = std::accumulate(tt.begin(), tt.end(), 0.0) / n;
        const double mp = std::accumulate(dp.begin(), dp.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t j = 0; j < tt.size(); ++j) {
            sxy += (tt[j] - mt) * (dp[j] - mp);
            sxx += (tt[j] - mt) * (tt[j] - mt);
        }
        ForcePoint fp;
        fp.x = x;
        fp.force = sxy / sxx;
        double ss = 0.0;
        for (std::size_t j = 0; j < tt.size(); ++j) {
            const double e = dp[j] - (mp + fp.force * (tt[j] - mt));
            ss += e * e;
        }
        fp.fit_residual = std::sqrt(ss / n) / (2.0 * model.p0);
        fp.nonlinear = fp.fit_residual > 0.1;
        if (fp.nonlinear)
            out.warnings.push_back("nonlinear momentum ramp at x=" + std::to_string(x) +
                                   ", residual " + std::to_string(fp.fit_residual));
        out.force_map.push_back(fp);
    }
    // impulse F*T integrated over [0, L]; constant extension outside the sampled range
    const auto& fm = out.force_map;
    double integral = fm.front().force * fm.front().x + fm.back().force * (model.L - fm.back().x);
    for (std::size_t i = 1; i < fm.size(); ++i)
        integral += 0.5 * (fm[i].x - fm[i - 1].x) * (fm[i].force + fm[i - 1].force);
    out.phase_estimate = integral * out.T;
    return out;
}

BarrierVariantResult barrier_variant_phase(const ScatteringModel& model) {
    if (!model.barrier_L1) throw ConfigError("barrier_variant_phase needs barrier_L1");
    BarrierVariantResult r;
    r.report = run_scattering(model);
    r.phase = r.report.final_phase;
    r.expected = wrap(2.0 * model.p0 * *model.barrier_L1);
    return r;
}

DisplacementResult displacement_expectation(const ConditionalWavefunction& state,
                                            const HeavySuperposition& heavy, double L) {
    if (!(heavy.sigma > 0.0) || !(L > 0.0)) throw DomainError("sigma and L must be > 0");
    const double span = heavy.span > 0.0 ? heavy.span : 4.0 * L + 20.0 * heavy.sigma;
    const double x_min = 0.5 * L - 0.5 * span;
    const Grid1D g = Grid1D::make(x_min, x_min + span, heavy.n_points);
    const double s = heavy.sigma;
    const double norm = std::pow(2.0 * pi * s * s, -0.25);
    auto packet = [&](double x, double c) { return norm * std::exp(-(x - c) * (x - c) / (4.0 * s * s)); };
    const cplx phase2 = std::polar(1.0, heavy.phi_rel);
    const std::size_t n = g.size();
    ComplexField psi1(g), psi2(g), shifted1(g), shifted2(g);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.x(i);
        psi1.values[i] = packet(x, 0.0);
        psi2.values[i] = phase2 * packet(x, L);
        shifted1.values[i] = packet(x + L, 0.0);
        shifted2.values[i] = phase2 * packet(x + L, L);
    }
    const auto& k = kernels::active();
    const double dx = g.dx();
    auto ov = [&](const ComplexField& a, const ComplexField& b) {
        return k.overlap(a.values.data(), b.values.data(), n) * dx;
    };
    DisplacementResult r;
    r.packet_overlap = std::abs(ov(psi1, psi2));
    if (r.packet_overlap > 1e-8)
        throw DomainError("heavy packets overlap (" + std::to_string(r.packet_overlap) +
                          " > 1e-8); increase the separation or narrow the packets");

    const double dxl = state.phi1.grid.dx();
    const auto& a = state.phi1.values;
    const auto& b = state.phi2.values;
    const cplx g11 = k.overlap(a.data(), a.data(), a.size()) * dxl;
    const cplx g12 = k.overlap(a.data(), b.data(), a.size()) * dxl;
    const cplx g22 = k.overlap(b.data(), b.data(), b.size()) * dxl;
    const cplx g21 = std::conj(g12);

    r.position_route = 0.5 * (g11 * ov(psi1, shifted1) + g12 * ov(psi1, shifted2) +
                              g21 * ov(psi2, shifted1) + g22 * ov(psi2, shifted2));

    // <psi_i| e^{ipL} |psi_j> = (dx / n) sum_k conj(A_i(k)) A_j(k) e^{ikL}
    const auto A1 = fourier_amplitudes(psi1);
    const auto A2 = fourier_amplitudes(psi2);
    auto translated = [&](const std::vector<cplx>& ai, const std::vector<cplx>& aj) {
        cplx acc;
        for (std::size_t m = 0; m < n; ++m) acc += std::conj(ai[m]) * aj[m] * std::polar(1.0, g.k(m) * L);
        return acc * dx / static_cast<double>(n);
    };
    r.fourier_route = 0.5 * (g11 * translated(A1, A1) + g12 * translated(A1, A2) +
                             g21 * translated(A2, A1) + g22 * translated(A2, A2));
    return r;
}

GradientCheck phase_gradient_check(double packet_width, const std::function<double(double)>& phase,
                                   double center, double L) {
    if (!(packet_width > 0.0) || packet_width > 0.01 * L)
        throw DomainError("phase_gradient_check needs 0 < packet width <= 0.01 L");
    const double half = 12.0 * packet_width;
    const Grid1D g = Grid1D::make(center - half, center + half, 2048);
    ComplexField f(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = (g.x(i) - center) / packet_width;
        f.values[i] = std::exp(-0.25 * u * u) * std::polar(1.0, phase(g.x(i)));
    }
    GradientCheck r;
    r.mean_momentum = momentum_expectation(f);
    const double h = 1e-3 * packet_width;
    r.gradient_at_center = (phase(center + h) - phase(center - h)) / (2.0 * h);
    return r;
}

} // namespace qphase::scatter
