#include "internal.hpp"

#include "qphase/errors.hpp"
#include "qphase/kernels.hpp"
#include "qphase/oracle.hpp"
#include "qphase/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qphase::scatter {
namespace detail {

Absorber::Absorber(const Grid1D& grid, double fraction, double strength, double dt)
    : n_(grid.size()), dx_(grid.dx()) {
    layer_ = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_)));
    left_.resize(layer_);
    right_.resize(layer_);
    for (std::size_t j = 0; j < layer_; ++j) {
        // depth 1 at the grid edge, 0 at the inner boundary of the layer
        const double depth = 1.0 - (static_cast<double>(j) + 0.5) / static_cast<double>(layer_);
        const double s = std::sin(0.5 * pi * depth);
        const double m = std::exp(-strength * s * s * dt);
        left_[j] = m;
        right_[layer_ - 1 - j] = m;
    }
}

double Absorber::apply(std::vector<cplx>& psi) const {
    const auto& k = kernels::active();
    double lost = k.scale_real(psi.data(), left_.data(), layer_);
    lost += k.scale_real(psi.data() + (n_ - layer_), right_.data(), layer_);
    return lost * dx_;
}

Window support(const std::vector<double>& v) {
    Window w{v.size(), 0};
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) {
            w.lo = std::min(w.lo, i);
            w.hi = i + 1;
        }
    }
    if (w.hi == 0) w.lo = 0;
    return w;
}

double momentum_fd(const std::vector<cplx>& psi) {
    if (psi.size() < 2) return 0.0;
    return kernels::active().overlap(psi.data(), psi.data() + 1, psi.size() - 1).imag();
}

SingleRun run_single(const ScatteringModel& model, const std::vector<double>& V, double t_final,
                     int sample_every, std::size_t probe_index) {
    const kernels::FlushDenormals ftz;
    const auto& grid = model.grid;
    const double dt = model.dt;
    const auto nsteps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
    CrankNicolson cn(grid, V, dt, model.mass);
    Absorber absorber(grid, model.mask_fraction, model.mask_strength, dt);
    auto psi = initial_packet(model).values;
    std::vector<cplx> work;
    SingleRun out;
    for (std::size_t n = 0;; ++n) {
        if (n % static_cast<std::size_t>(sample_every) == 0 || n == nsteps) {
            out.times.push_back(static_cast<double>(n) * dt);
            out.momentum.push_back(momentum_fd(psi));
            out.probe_density.push_back(probe_index < psi.size() ? std::norm(psi[probe_index]) : 0.0);
        }
        if (n == nsteps) break;
        cn.step(psi, work);
        out.absorbed += absorber.apply(psi);
        if (out.absorbed > 0.01)
            throw BoundaryContamination("absorbed probability exceeds 1% before t_final",
                                        out.absorbed);
    }
    if (!std::isfinite(out.momentum.back())) throw NumericError("single-branch run diverged");
    return out;
}

} // namespace detail

namespace {

using detail::Absorber;
using detail::Window;

// Catmull-Rom interpolation of a uniformly sampled series at fractional index s.
double interp(const std::vector<double>& y, double s) {
    const auto n = static_cast<long long>(y.size());
    const auto i = static_cast<long long>(std::floor(s));
    const double f = s - static_cast<double>(i);
    auto at = [&](long long j) { return y[static_cast<std::size_t>(std::clamp(j, 0LL, n - 1))]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                          f * (3.0 * (p1 - p2) + p3 - p0)));
}

cplx windowed_overlap(const std::vector<cplx>& a, const std::vector<double>& w,
                      const std::vector<cplx>& b, const Window& win) {
    if (win.size() == 0) return {};
    return kernels::active().weighted_overlap(a.data() + win.lo, w.data() + win.lo,
                                              b.data() + win.lo, win.size());
}

double windowed_norm(const std::vector<cplx>& a, const std::vector<double>& w, const Window& win) {
    if (win.size() == 0) return 0.0;
    return kernels::active().weighted_norm2(a.data() + win.lo, w.data() + win.lo, win.size());
}

void check_reflection(const ScatteringModel& model, ScatteringReport& r) {
    const auto st = stationary_scatter(model.alpha_tilde, model.p0, model.delta_width);
    const auto exact = oracle::delta_coeffs(model.alpha_tilde, model.p0);
    r.reflection_rel_error = std::abs(st.A - exact.A) / std::abs(exact.A);
    if (r.reflection_rel_error >= 0.01) {
        std::ostringstream msg;
        msg << "delta regularisation rejected: reflection amplitude off by "
            << 100.0 * r.reflection_rel_error << "% (> 1%) at delta_width=" << model.delta_width;
        throw ConfigError(msg.str());
    }
}

struct Branches {
    const ScatteringModel& model;
    BranchPotentials pots;
    CrankNicolson cn1, cn2;
    Absorber absorber;
    std::vector<cplx> psi1, psi2, w1, w2;
    double absorbed1 = 0.0, absorbed2 = 0.0;

    explicit Branches(const ScatteringModel& m)
        : model(m),
          pots(build_branch_potentials(m)),
          cn1(m.grid, pots.V1, m.dt, m.mass),
          cn2(m.grid, pots.V2, m.dt, m.mass),
          absorber(m.grid, m.mask_fraction, m.mask_strength, m.dt) {
        psi1 = initial_packet(m).values;
        psi2 = psi1;
    }

    void step() {
        CrankNicolson::step_pair(cn1, cn2, psi1, psi2, w1, w2);
        absorbed1 += absorber.apply(psi1);
        absorbed2 += absorber.apply(psi2);
        const double a = std::max(absorbed1, absorbed2);
        if (a > 0.01)
            throw BoundaryContamination("absorbed probability exceeds 1% before t_final", a);
    }
};

} // namespace

ConditionalWavefunction evolve_branches(const ScatteringModel& model, double t) {
    model.validate();
    const kernels::FlushDenormals ftz;
    Branches b(model);
    const auto nsteps = static_cast<std::size_t>(std::llround(t / model.dt));
    for (std::size_t n = 0; n < nsteps; ++n) b.step();
    ConditionalWavefunction s;
    s.phi1 = ComplexField(model.grid);
    s.phi2 = ComplexField(model.grid);
    s.phi1.values = b.psi1;
    s.phi2.values = b.psi2;
    s.time = static_cast<double>(nsteps) * model.dt;
    s.norm1 = s.phi1.norm2();
    s.norm2 = s.phi2.norm2();
    return s;
}

cplx private_potential_numeric(const ConditionalWavefunction& state, const BranchPotentials& pots) {
    if (!(state.phi1.grid == state.phi2.grid) || pots.V1.size() != state.phi1.values.size() ||
        pots.V2.size() != state.phi1.values.size())
        throw ConfigError("private_potential_numeric: grid mismatch");
    std::vector<double> d1(pots.V1.size()), d2(pots.V2.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
        d1[i] = pots.V1[i] - pots.wall[i];
        d2[i] = pots.V2[i] - pots.wall[i];
    }
    const auto& a = state.phi1.values;
    const auto& b = state.phi2.values;
    const cplx v = windowed_overlap(a, d1, b, detail::support(d1)) -
                   windowed_overlap(a, d2, b, detail::support(d2));
    return cplx(0.0, 1.0) * v * state.phi1.grid.dx();
}

cplx private_potential_numeric(const ConditionalWavefunction& state, const ScatteringModel& model) {
    return private_potential_numeric(state, build_branch_potentials(model));
}

std::vector<double> free_incident_density(const ScatteringModel& model,
                                          const std::vector<double>& times, double w_eff,
                                          double x) {
    const auto psi0 = initial_packet(model);
    const auto& grid = model.grid;
    const auto amps = fourier_amplitudes(psi0);
    const std::size_t n = grid.size();
        double amax = 0.0;
    for (const auto& a : amps) amax = std::max(amax, std::abs(a));
    std::vector<double> ks;
    std::vector<cplx> cs;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(amps[i]) < 1e-13 * amax) continue;
        const double k = grid.k(i);
        ks.push_back(k);
        cs.push_back(amps[i] * std::polar(1.0, k * (x - grid.x_min())) /
                     static_cast<double>(n));
    }
    std::vector<double> out;
    out.reserve(times.size());
    for (const double t : times) {
        cplx s;
        for (std::size_t i = 0; i < ks.size(); ++i)
            s += cs[i] * std::polar(1.0, -0.5 * ks[i] * ks[i] * t / model.mass);
        out.push_back(std::norm(s) * w_eff);
    }
    return out;
}

ScatteringReport run_scattering(const ScatteringModel& model, std::optional<double> t_final,
                                int sample_every) {
    const kernels::FlushDenormals ftz;
    ScatteringReport r;
    r.warnings = model.validate();
    if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
    check_reflection(model, r);
    const double tf = t_final.value_or(model.default_t_final());
    if (tf < model.ramp_start() + model.T())
        throw ConfigError("t_final must cover the reflection ramp (>= ramp_start + W/v0)");

    const auto& grid = model.grid;
    const double dx = grid.dx();
    const double dt = model.dt;
    const auto nsteps = static_cast<std::size_t>(std::ceil(tf / dt - 1e-9));
    const auto se = static_cast<std::size_t>(sample_every);

    Branches br(model);
    std::vector<double> d1(grid.size()), d2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        d1[i] = br.pots.V1[i] - br.pots.wall[i];
        d2[i] = br.pots.V2[i] - br.pots.wall[i];
    }
    const Window win1 = detail::support(d1);
    const Window win2 = detail::support(d2);

    r.T = model.T();
    r.ramp_start = model.ramp_start();
    r.step_dt = dt;
    r.W_eff_measured = measured_fwhm(initial_packet(model));
    r.v_expect1.resize(nsteps + 1);
    r.v_expect2.resize(nsteps + 1);

    std::vector<cplx> d_step(nsteps + 1);
    std::vector<char> have(nsteps + 1, 0);
    std::vector<std::size_t> sample_steps;
    const double p_initial = detail::momentum_fd(br.psi1);
    const cplx I(0.0, 1.0);

    for (std::size_t n = 0;; ++n) {
        r.v_expect1[n] = windowed_norm(br.psi1, d1, win1) * dx;
        r.v_expect2[n] = windowed_norm(br.psi2, d2, win2) * dx;
        const std::size_t m = n % se;
        const bool sample = m == 0 || n == nsteps;
        if (sample || m == 1 || m + 1 == se || n + 1 == nsteps) {
            d_step[n] = kernels::active().overlap(br.psi1.data(), br.psi2.data(), grid.size()) * dx;
            have[n] = 1;
        }
        if (sample) {
            const cplx D = d_step[n];
            if (!std::isfinite(D.real()) || !std::isfinite(D.imag()))
                throw NumericError("non-finite overlap at t=" + std::to_string(n * dt));
            const double t = static_cast<double>(n) * dt;
            const cplx P = I * (windowed_overlap(br.psi1, d1, br.psi2, win1) -
                                windowed_overlap(br.psi1, d2, br.psi2, win2)) * dx;
            const double n1 = kernels::active().norm2(br.psi1.data(), grid.size()) * dx;
            const double n2 = kernels::active().norm2(br.psi2.data(), grid.size()) * dx;
            r.max_norm_drift = std::max({r.max_norm_drift, std::abs(n1 + br.absorbed1 - 1.0),
                                         std::abs(n2 + br.absorbed2 - 1.0)});
            r.times.push_back(t);
            r.overlap.push_back(D);
            r.private_potential.push_back(P);
            r.momentum_transfer.push_back(p_initial - detail::momentum_fd(br.psi1));
            sample_steps.push_back(n);
        }
        if (n == nsteps) break;
        br.step();
    }
    r.steps = nsteps;
    r.absorbed_probability = std::max(br.absorbed1, br.absorbed2);

    const double v0 = model.v0();
    double prev_arg = 0.0, unwrapped = 0.0;
    r.incident_density = free_incident_density(model, r.times, r.W_eff_measured);
    r.incident_density_L = free_incident_density(model, r.times, r.W_eff_measured, model.L);
    std::size_t run_begin = 0, run_len = 0;
    for (std::size_t j = 0, len = 0; j < r.times.size(); ++j) {
        const bool ok = std::abs(r.incident_density[j] - 1.0) <= 0.05 &&
                        std::abs(r.incident_density_L[j] - 1.0) <= 0.05;
        len = ok ? len + 1 : 0;
        if (len > run_len) {
            run_len = len;
            run_begin = j + 1 - len;
        }
    }
    double plateau_err = 0.0, central_err = 0.0;
    cplx plateau_sum;
    std::size_t plateau_count = 0, ramp_count = 0;
    r.plateau_t_begin = r.plateau_t_end = 0.0;
    const cplx P_oracle =
        oracle::private_potential_scatter(model.W, v0, model.p0, model.L, model.alpha_tilde,
                                          model.mass)
            .value;
    for (std::size_t j = 0; j < r.times.size(); ++j) {
        const double t = r.times[j];
        const cplx D = r.overlap[j];
        const double a = std::arg(D);
        if (j == 0) {
            unwrapped = a;
        } else {
            double d = a - prev_arg;
            while (d > pi) d -= 2.0 * pi;
            while (d < -pi) d += 2.0 * pi;
            unwrapped += d;
        }
        prev_arg = a;
        r.phase_unwrapped.push_back(unwrapped);
        r.max_overlap_modulus = std::max(r.max_overlap_modulus, std::abs(D));

        const double tr = std::clamp(t - r.ramp_start, 0.0, r.T);
        const cplx ramp = oracle::ramp_overlap(model.W, v0, model.p0, model.L, tr);
        r.ramp_oracle.push_back(ramp);
        r.ramp_sup_error = std::max(r.ramp_sup_error, std::abs(D - ramp));

        const std::size_t n = sample_steps[j];
        cplx fd;
        bool central = false;
        if (n > 0 && n < nsteps && have[n - 1] && have[n + 1]) {
            fd = (d_step[n + 1] - d_step[n - 1]) / (2.0 * dt);
            central = true;
        } else if (n < nsteps && have[n + 1]) {
            fd = (d_step[n + 1] - d_step[n]) / dt;
        } else if (n > 0 && have[n - 1]) {
            fd = (d_step[n] - d_step[n - 1]) / dt;
        }
        r.overlap_derivative.push_back(fd);
        if (central)
            r.max_fd_mismatch = std::max(r.max_fd_mismatch, std::abs(fd - r.private_potential[j]));

        const double rel = std::abs(r.private_potential[j] - P_oracle) / std::abs(P_oracle);
        if (t >= r.ramp_start + 0.2 * r.T && t <= r.ramp_start + 0.8 * r.T)
            central_err = std::max(central_err, rel);
        if (t >= r.ramp_start && t <= r.ramp_start + r.T) ++ramp_count;
        if (j >= run_begin && j < run_begin + run_len) {
            plateau_err = std::max(plateau_err, rel);
            plateau_sum += r.private_potential[j];
            if (plateau_count == 0) r.plateau_t_begin = t;
            r.plateau_t_end = t;
            ++plateau_count;
        }
    }
    r.plateau_private_potential_rel_error = plateau_err;
    r.central_private_potential_rel_error = central_err;
    if (plateau_count > 0) r.plateau_private_potential = plateau_sum / double(plateau_count);
    if (ramp_count > 0) r.plateau_fraction = double(plateau_count) / double(ramp_count);
    r.final_overlap = r.overlap.back();
    r.final_phase = std::arg(r.final_overlap);
    r.final_phase_unwrapped = r.phase_unwrapped.back();

    // <V>_2 lags <V>_1 by the extra flight time L / v0
    const double shift = model.L / v0 / dt;
    for (std::size_t n = 0; n <= nsteps; ++n) {
        r.max_equal_time_v_difference =
            std::max(r.max_equal_time_v_difference, std::abs(r.v_expect1[n] - r.v_expect2[n]));
        const double s = static_cast<double>(n) + shift;
        if (s > static_cast<double>(nsteps)) break;
        r.max_matched_v_difference =
            std::max(r.max_matched_v_difference, std::abs(r.v_expect1[n] - interp(r.v_expect2, s)));
    }

    for (const auto& u : phase_uncertainty_series(r, model)) {
        r.variance.push_back(u.variance);
        r.deficit.push_back(u.deficit);
        r.max_impulse_bound = std::max(r.max_impulse_bound, u.impulse_bound);
        r.impulse_bound_violated = r.impulse_bound_violated || u.violated;
    }
    return r;
}

std::vector<UncertaintyPoint> phase_uncertainty_series(const ScatteringReport& report,
                                                       const ScatteringModel& model) {
    std::vector<UncertaintyPoint> out;
    const double shift = 2.0 * model.p0 * model.L;
    for (std::size_t j = 0; j < report.times.size(); ++j) {
        UncertaintyPoint u;
        u.t = report.times[j];
        const double P = std::clamp((u.t - report.ramp_start) / report.T, 0.0, 1.0);
        u.variance = P * (1.0 - P) * shift * shift;
        u.deficit = 1.0 - std::abs(report.overlap[j]);
        // integral over [0, L] of the impulse spread for a 0 / 2 p0 momentum kick
        u.impulse_bound = shift * std::sqrt(P * (1.0 - P));
        u.violated = u.impulse_bound >= 2.0 * pi;
        out.push_back(u);
    }
    return out;
}

} // namespace qphase::scatter
