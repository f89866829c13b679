#include "internal.hpp"

#include "qphase/errors.hpp"
#include "qphase/numerics.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace qphase::harness {
namespace {

using detail::json;
using clock = std::chrono::system_clock;

double at(const std::vector<double>& v, std::size_t i) {
    return i < v.size() ? v[i] : std::numeric_limits<double>::quiet_NaN();
}

cplx at(const std::vector<cplx>& v, std::size_t i) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return i < v.size() ? v[i] : cplx(nan, nan);
}

json warnings_json(const std::vector<std::string>& w) { return json(w); }

std::string scatter_gnuplot() {
    return "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set xlabel 't'\n"
           "set multiplot layout 2,1\n"
           "plot 'scatter_timeseries.csv' using 1:4 with lines, '' using 1:5 with lines\n"
           "plot 'scatter_timeseries.csv' using 1:6 with lines, '' using 1:7 with lines\n"
           "unset multiplot\n";
}

std::string dipole_gnuplot() {
    return "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set xlabel 't'\n"
           "set multiplot layout 2,1\n"
           "plot 'dipole_timeseries.csv' using 1:2 with lines, '' using 1:5 with lines, '' using 1:8 with lines\n"
           "plot 'dipole_timeseries.csv' using 1:9 with lines\n"
           "unset multiplot\n";
}

// Common failure path: manifest records the exit code next to whatever was written.
RunOutcome finish_failure(const std::filesystem::path& dir, detail::ManifestInfo& info,
                          const std::exception& e) {
    RunOutcome out;
    out.exit_code = exit_code_for(e);
    out.message = e.what();
    out.run_id = info.run_id;
    out.dir = dir;
    info.finished = clock::now();
    info.exit_code = out.exit_code;
    info.message = out.message;
    detail::write_manifest(dir, info);
    return out;
}

std::string scatter_csv(const scatter::ScatteringReport& r) {
    CsvTable t({"t", "D_re", "D_im", "D_abs", "phase_unwrapped", "P_re", "P_im", "dD_re", "dD_im",
                "momentum_transfer", "variance", "deficit", "ramp_oracle_re", "ramp_oracle_im",
                "incident_density_0", "incident_density_L"});
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        const cplx d = at(r.overlap, i), p = at(r.private_potential, i);
        const cplx dd = at(r.overlap_derivative, i), o = at(r.ramp_oracle, i);
        t.add_row({r.times[i], d.real(), d.imag(), std::abs(d), at(r.phase_unwrapped, i),
                   p.real(), p.imag(), dd.real(), dd.imag(), at(r.momentum_transfer, i),
                   at(r.variance, i), at(r.deficit, i), o.real(), o.imag(),
                   at(r.incident_density, i), at(r.incident_density_L, i)});
    }
    return t.str();
}

json scatter_summary(const scatter::ScatteringModel& m, const scatter::ScatteringReport& r) {
    json s;
    s["final_phase"] = r.final_phase;
    s["final_phase_unwrapped"] = r.final_phase_unwrapped;
    s["expected_phase"] = dipole::wrap_phase(2.0 * m.p0 * m.L);
    s["final_overlap"] = detail::complex_json(r.final_overlap);
    s["absorbed_probability"] = r.absorbed_probability;
    s["max_norm_drift"] = r.max_norm_drift;
    s["max_overlap_modulus"] = r.max_overlap_modulus;
    s["ramp_sup_error"] = r.ramp_sup_error;
    s["ramp_start"] = r.ramp_start;
    s["T"] = r.T;
    s["W_eff_measured"] = r.W_eff_measured;
    s["plateau_private_potential"] = detail::complex_json(r.plateau_private_potential);
    s["plateau_private_potential_rel_error"] = r.plateau_private_potential_rel_error;
    s["plateau_window"] = json::array({r.plateau_t_begin, r.plateau_t_end});
    s["plateau_fraction"] = r.plateau_fraction;
    s["central_private_potential_rel_error"] = r.central_private_potential_rel_error;
    s["max_fd_mismatch"] = r.max_fd_mismatch;
    s["max_matched_v_difference"] = r.max_matched_v_difference;
    s["max_equal_time_v_difference"] = r.max_equal_time_v_difference;
    s["max_impulse_bound"] = r.max_impulse_bound;
    s["impulse_bound_violated"] = r.impulse_bound_violated;
    s["reflection_rel_error"] = r.reflection_rel_error;
    s["steps"] = r.steps;
    s["grid"] = {{"x_min", m.grid.x_min()}, {"x_max", m.grid.x_max()},
                 {"n", m.grid.size()}, {"dx", m.grid.dx()}, {"dt", m.dt}};
    return s;
}

std::vector<double> path_positions(const Config& cfg, double L) {
    auto xs = cfg.get_list("path_integral", "positions");
    if (!xs.empty()) return xs;
    const int n = cfg.get_int("path_integral", "n", 9);
    if (n < 2) throw ConfigError("[path_integral] n must be >= 2");
    for (int i = 0; i < n; ++i) xs.push_back(L * i / (n - 1));
    return xs;
}

} // namespace

RunOutcome run_scatter(const Config& cfg, const RunOptions& opt) {
    const auto started = clock::now();
    cfg.check_schema(scatter_schema());
    auto model = scatter_model(cfg, opt.override_validation);
    auto warnings = model.validate();
    const int sample_every = cfg.get_int("scatter", "sample_every", 5);
    if (sample_every < 1) throw ConfigError("[scatter] sample_every must be >= 1");
    std::optional<double> t_final;
    if (cfg.has("scatter", "t_final")) t_final = cfg.get_double("scatter", "t_final", 0.0);

    detail::ManifestInfo info;
    info.command = "scatter";
    info.run_id = cfg.run_id();
    info.config = &cfg;
    info.started = started;
    const auto dir = detail::run_directory(opt.out_root, info.run_id);
    try {
        json summary;
        scatter::ScatteringReport report;
        if (model.barrier_L1) {
            auto b = scatter::barrier_variant_phase(model);
            summary["barrier"] = {{"L1", *model.barrier_L1}, {"phase", b.phase}, {"expected", b.expected}};
            report = std::move(b.report);
        } else {
            report = scatter::run_scattering(model, t_final, sample_every);
        }
        write_file(dir / "scatter_timeseries.csv", scatter_csv(report));
        info.outputs.push_back("scatter_timeseries.csv");
        summary.update(scatter_summary(model, report));
        for (const auto& w : report.warnings) warnings.push_back(w);

        if (cfg.has("probe")) {
            const double eps = cfg.get_double("probe", "epsilon", 1e-2);
            const double pos = cfg.get_double("probe", "position", -2.0);
            const std::string br = cfg.get_string("probe", "branch", "none");
            scatter::ProbeBranch branch = scatter::ProbeBranch::none;
            if (br == "branch1") branch = scatter::ProbeBranch::branch1;
            else if (br == "branch2") branch = scatter::ProbeBranch::branch2;
            else if (br != "none") throw ConfigError("[probe] branch must be none, branch1 or branch2");
            const auto p = scatter::public_potential_probe(model, eps, pos, branch);
            summary["probe"] = {{"epsilon", eps}, {"position", pos}, {"branch", br},
                                {"phase", p.phase}, {"expected", p.expected},
                                {"weak_coupling_warning", p.weak_coupling_warning}};
        }
        if (cfg.has("path_integral")) {
            const auto pi_res = scatter::momentum_transfer_and_path_integral(model, path_positions(cfg, model.L));
            CsvTable t({"x", "force", "fit_residual", "nonlinear"});
            for (const auto& f : pi_res.force_map)
                t.add_row({f.x, f.force, f.fit_residual, f.nonlinear ? 1.0 : 0.0});
            write_file(dir / "force_map.csv", t.str());
            info.outputs.push_back("force_map.csv");
            summary["path_integral"] = {{"phase_estimate", pi_res.phase_estimate},
                                        {"expected", pi_res.expected}, {"T", pi_res.T}};
            for (const auto& w : pi_res.warnings) warnings.push_back(w);
        }
        summary["warnings"] = warnings_json(warnings);
        write_file(dir / "summary.json", detail::dump(summary));
        info.outputs.push_back("summary.json");
        if (cfg.get_bool("output", "gnuplot", true)) {
            write_file(dir / "plot.gp", scatter_gnuplot());
            info.outputs.push_back("plot.gp");
        }
        info.convergence = {{"dx", model.grid.dx()}, {"dt", model.dt}, {"steps", report.steps}};
        info.finished = clock::now();
        detail::write_manifest(dir, info);

        RunOutcome out;
        out.run_id = info.run_id;
        out.dir = dir;
        out.scalars = {{"final_phase", report.final_phase},
                       {"phase_error", std::abs(dipole::wrap_phase(report.final_phase - 2.0 * model.p0 * model.L))},
                       {"ramp_sup_error", report.ramp_sup_error},
                       {"absorbed_probability", report.absorbed_probability},
                       {"max_norm_drift", report.max_norm_drift},
                       {"max_overlap_modulus", report.max_overlap_modulus}};
        return out;
    } catch (const std::exception& e) {
        return finish_failure(dir, info, e);
    }
}

RunOutcome run_dipole(const Config& cfg, const RunOptions& opt) {
    const auto started = clock::now();
    cfg.check_schema(dipole_schema());
    const auto model = dipole_model(cfg);
    auto warnings = model.validate();
    const int samples = cfg.get_int("dipole", "samples", 2001);
    if (samples < 2) throw ConfigError("[dipole] samples must be >= 2");
    std::vector<double> u_times = cfg.get_list("uncertainty", "times");
    if (u_times.empty()) {
        const int n = cfg.get_int("uncertainty", "samples", 5);
        if (n < 0) throw ConfigError("[uncertainty] samples must be >= 0");
        const double a = model.t_start(), b = model.t_end();
        for (int i = 0; i < n; ++i) u_times.push_back(n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1));
    }

    detail::ManifestInfo info;
    info.command = "dipole";
    info.run_id = cfg.run_id();
    info.config = &cfg;
    info.started = started;
    const auto dir = detail::run_directory(opt.out_root, info.run_id);
    try {
        json summary;
        const auto traj = dipole::relative_phase_trajectory(model, static_cast<std::size_t>(samples));
        CsvTable t({"t", "g", "E1", "E2", "R", "total_re", "total_im", "total_abs", "bo_phase"});
        double min_abs = 1.0;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            const cplx f = traj.total_factor[i];
            min_abs = std::min(min_abs, std::abs(f));
            t.add_row({traj.times[i], traj.g[i], traj.E1[i], traj.E2[i], traj.R[i], f.real(),
                       f.imag(), std::abs(f), traj.bo_phase[i]});
        }
        write_file(dir / "dipole_timeseries.csv", t.str());
        info.outputs.push_back("dipole_timeseries.csv");
        summary["phi_rel_final"] = traj.phi_rel_final;
        summary["phi0"] = traj.phi0;
        summary["r_final"] = traj.r_final;
        summary["R_measured_final"] = traj.R_measured_final;
        summary["bo_phase_final"] = traj.bo_phase_final;
        summary["phase_residual"] = traj.phase_residual;
        summary["max_norm_drift"] = traj.max_norm_drift;
        summary["min_total_factor_modulus"] = min_abs;
        summary["adiabaticity"] = model.schedule.adiabaticity(model.alpha);

        const auto g = dipole::gedanken_run(model);
        summary["gedanken"] = {{"phi_exact", g.phi_exact}, {"phi0", g.phi0},
                               {"plateau_oracle", g.plateau_oracle}, {"tail_numeric", g.tail_numeric},
                               {"path_integral", g.path_integral}, {"delta_oracle", g.delta_oracle},
                               {"delta_path", g.delta_path}, {"fringe_shift", g.fringe_shift},
                               {"consistent", g.consistent}};

        if (!u_times.empty()) {
            CsvTable u({"t", "I2", "I3", "delta_phi_sq", "delta_phi"});
            for (double tt : u_times) {
                const auto r = dipole::uncertainty_integrals(model, tt);
                u.add_row({tt, r.I2, r.I3, r.delta_phi_sq, r.delta_phi});
            }
            write_file(dir / "uncertainty.csv", u.str());
            info.outputs.push_back("uncertainty.csv");
            const double mid = 0.5 * (model.schedule.t1 + model.schedule.t2);
            if (model.schedule.g0 > 0.0) {
                const auto sp = dipole::stationary_phase_check(model, model.z2, mid);
                summary["stationary_phase"] = {{"t", mid}, {"numeric", detail::complex_json(sp.numeric)},
                                               {"closed_form", detail::complex_json(sp.closed_form)},
                                               {"rel_gap", sp.rel_gap}, {"eps_over_omega", sp.eps_over_omega},
                                               {"constant", sp.constant}};
            }
        }
        if (model.second) {
            const auto td = dipole::two_dipole_experiment(model);
            summary["two_dipole"] = {{"z_balance", td.z_balance}, {"gf_balance", td.gf_balance},
                                     {"residual", td.residual}, {"dU", td.dU},
                                     {"dU_closed_form", td.dU_closed_form},
                                     {"off_plateau_residual", td.off_plateau_residual},
                                     {"balance_fails_off_plateau", td.balance_fails_off_plateau}};
        }
        summary["warnings"] = warnings_json(warnings);
        write_file(dir / "summary.json", detail::dump(summary));
        info.outputs.push_back("summary.json");
        if (cfg.get_bool("output", "gnuplot", true)) {
            write_file(dir / "plot.gp", dipole_gnuplot());
            info.outputs.push_back("plot.gp");
        }
        info.convergence = {{"tol", model.tol}, {"samples", samples}};
        info.finished = clock::now();
        detail::write_manifest(dir, info);

        RunOutcome out;
        out.run_id = info.run_id;
        out.dir = dir;
        out.scalars = {{"phi_rel_final", traj.phi_rel_final}, {"phi0", traj.phi0},
                       {"r_final", traj.r_final}, {"delta_oracle", g.delta_oracle},
                       {"delta_path", g.delta_path}, {"max_norm_drift", traj.max_norm_drift}};
        return out;
    } catch (const std::exception& e) {
        return finish_failure(dir, info, e);
    }
}

namespace {

int report(const RunOutcome& r, const char* what) {
    if (r.exit_code == exit_ok) {
        std::cout << what << " run " << r.run_id << " -> " << r.dir.string() << "\n";
    } else {
        std::cerr << "error: " << r.message << "\n";
    }
    return r.exit_code;
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace

int cmd_scatter(const std::filesystem::path& config, const RunOptions& opt) {
    return guarded([&] { return report(run_scatter(Config::load(config), opt), "scatter"); });
}

int cmd_dipole(const std::filesystem::path& config, const RunOptions& opt) {
    return guarded([&] { return report(run_dipole(Config::load(config), opt), "dipole"); });
}

namespace {

int converge_scatter(const Config& cfg, const RunOptions& opt, std::ostream& os) {
    const auto started = clock::now();
    cfg.check_schema(scatter_schema());
    const int levels = cfg.get_int("converge", "levels", 2);
    const double tolerance = cfg.get_double("converge", "tolerance", 1e-3);
    if (levels < 2) throw ConfigError("[converge] levels must be >= 2");
    const int cells = cfg.get_int("scatter", "cells_per_L", 400);
    std::optional<double> t_final;
    if (cfg.has("scatter", "t_final")) t_final = cfg.get_double("scatter", "t_final", 0.0);

    CsvTable t({"level", "cells_per_L", "dt", "final_phase", "drift"});
    std::vector<double> phases, drifts;
    json ladder = json::array();
    for (int k = 0; k < levels; ++k) {
        auto m = scatter_model(cfg, opt.override_validation);
        m.dt /= std::ldexp(1.0, k);
        m.grid = scatter::default_grid(m.L, m.W, cells << k, m.margin);
        m.validate();
        const auto r = scatter::run_scattering(m, t_final, 1000000);
        phases.push_back(r.final_phase);
        const double drift = k ? std::abs(dipole::wrap_phase(r.final_phase - phases[k - 1]))
                               : std::numeric_limits<double>::quiet_NaN();
        if (k) drifts.push_back(drift);
        t.add_row({double(k), double(cells << k), m.dt, r.final_phase, drift});
        ladder.push_back({{"level", k}, {"cells_per_L", cells << k}, {"dt", m.dt},
                          {"final_phase", r.final_phase}, {"drift", k ? json(drift) : json(nullptr)}});
        os << "level " << k << ": cells_per_L=" << (cells << k) << " dt=" << format_double(m.dt)
           << " final_phase=" << format_double(r.final_phase);
        if (k) os << " drift=" << format_double(drift);
        os << "\n";
    }
    json meta{{"kind", "scatter"}, {"ladder", ladder}, {"tolerance", tolerance}};
    if (drifts.size() >= 2 && drifts[drifts.size() - 1] > 0.0) {
        const double order = std::log2(drifts[drifts.size() - 2] / drifts.back());
        meta["observed_order"] = order;
        os << "observed order: " << format_double(order) << "\n";
    }
    const bool pass = drifts.back() < tolerance;
    meta["pass"] = pass;
    os << (pass ? "PASS" : "FAIL") << ": last drift " << format_double(drifts.back())
       << (pass ? " < " : " >= ") << format_double(tolerance) << " rad\n";

    Config keyed = cfg;
    keyed.set("converge", "command", "converge");
    detail::ManifestInfo info;
    info.command = "converge";
    info.run_id = keyed.run_id();
    info.config = &cfg;
    info.started = started;
    const auto dir = detail::run_directory(opt.out_root, info.run_id);
    write_file(dir / "converge.csv", t.str());
    info.outputs.push_back("converge.csv");
    info.convergence = meta;
    info.finished = clock::now();
    detail::write_manifest(dir, info);
    return pass ? exit_ok : exit_consistency;
}

int converge_dipole(const Config& cfg, const RunOptions& opt, std::ostream& os) {
    const auto started = clock::now();
    cfg.check_schema(dipole_schema());
    const auto model = dipole_model(cfg);
    model.validate();
    auto tols = cfg.get_list("converge", "tols");
    if (tols.empty()) tols = {1e-5, 1e-6, 1e-7, 1e-8, 1e-9};
    if (tols.size() < 2) throw ConfigError("[converge] tols needs at least two values");
    const std::vector<double> ends{model.t_start(), model.t_end()};
    const auto ref = dipole::evolve_dipole(model, model.z2, ends, 1e-12).states.back();

    CsvTable t({"tol", "steps", "error"});
    std::vector<double> lx, ly;
    json ladder = json::array();
    for (double tol : tols) {
        const auto tr = dipole::evolve_dipole(model, model.z2, ends, tol);
        const auto& y = tr.states.back();
        const double err = std::hypot(std::abs(y[0] - ref[0]), std::abs(y[1] - ref[1]));
        t.add_row({tol, double(tr.steps), err});
        ladder.push_back({{"tol", tol}, {"steps", tr.steps}, {"error", err}});
        os << "tol " << format_double(tol) << ": steps=" << tr.steps << " error=" << format_double(err) << "\n";
        if (err > 0.0) {
            lx.push_back(std::log(double(tr.steps)));
            ly.push_back(std::log(err));
        }
    }
    if (lx.size() < 2) throw NumericError("dipole tolerance ladder has too few nonzero errors");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    const double order = -sxy / sxx;
    // Dormand-Prince is fifth order in the step size
    const bool pass = std::abs(order - 5.0) <= 1.0;
    os << "observed order: " << format_double(order) << "\n"
       << (pass ? "PASS" : "FAIL") << ": integrator order 5 expected within 1\n";

    Config keyed = cfg;
    keyed.set("converge", "command", "converge");
    detail::ManifestInfo info;
    info.command = "converge";
    info.run_id = keyed.run_id();
    info.config = &cfg;
    info.started = started;
    const auto dir = detail::run_directory(opt.out_root, info.run_id);
    write_file(dir / "converge.csv", t.str());
    info.outputs.push_back("converge.csv");
    info.convergence = {{"kind", "dipole"}, {"ladder", ladder}, {"observed_order", order}, {"pass", pass}};
    info.finished = clock::now();
    detail::write_manifest(dir, info);
    return pass ? exit_ok : exit_consistency;
}

} // namespace

int cmd_converge(const std::filesystem::path& config, const RunOptions& opt, std::ostream& os) {
    return guarded([&] {
        const auto cfg = Config::load(config);
        if (cfg.has("dipole") || cfg.has("schedule")) return converge_dipole(cfg, opt, os);
        return converge_scatter(cfg, opt, os);
    });
}

} // namespace qphase::harness
