#include "qphase/dipole.hpp"

#include "qphase/errors.hpp"
#include "qphase/oracle.hpp"

#include <cmath>
#include <sstream>

namespace qphase::dipole {
namespace {

std::vector<double> uniform_times(double a, double b, std::size_t n) {
    if (n < 2) throw DomainError("need at least two samples");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    t.back() = b;
    return t;
}

// omega(t) = sqrt(alpha^2 + (beta g f)^2) integrated between consecutive samples.
std::vector<double> cumulative_omega(const DipoleModel& m, double fz, const std::vector<double>& t) {
    auto omega = [&](double u) { return std::hypot(m.alpha, m.beta * m.schedule.g(u) * fz); };
    std::vector<double> out(t.size(), 0.0);
    const double t1 = m.schedule.t1, t2 = m.schedule.t2;
    for (std::size_t i = 1; i < t.size(); ++i) {
        double a = t[i - 1], acc = 0.0;
        // split at the plateau edges where g has a kink
        for (double br : {t1, t2, t[i]}) {
            if (br <= a || br > t[i]) continue;
            acc += quad(omega, a, br, 1e-12 * std::max(1.0, m.alpha * (br - a))).value;
            a = br;
        }
        out[i] = out[i - 1] + acc;
    }
    return out;
}

double tail_integral(const DipoleModel& m, double fz, double a, double b) {
    auto excess = [&](double u) {
        const double b = m.beta * m.schedule.g(u) * fz;
        return b * b / (std::hypot(m.alpha, b) + m.alpha);
    };
    return quad(excess, a, b, 1e-12).value;
}

} // namespace

TwoLevelTrajectory evolve_dipole(const DipoleModel& model, double z,
                                 const std::vector<double>& times, double tol) {
    if (times.empty()) throw DomainError("evolve_dipole needs sample times");
    const double t0 = model.t_start();
    if (times.front() < t0) throw DomainError("samples must start at or after the switch-on time");
    const double fz = model.f(z);
    const double a = model.alpha;
    const Rhs rhs = [&](const State2& y, State2& dy, double t) {
        const double b = model.beta * model.schedule.g(t) * fz;
        const cplx mi(0.0, -1.0);
        dy[0] = mi * (a * y[0] + b * y[1]);
        dy[1] = mi * (b * y[0] - a * y[1]);
    };
    const State2 y0{cplx(0.0, 0.0), cplx(1.0, 0.0)};  // |sigma_1 = -1>
    Trajectory tr;
    try {
        tr = integrate_ode(rhs, y0, t0, times.back(), tol, times);
    } catch (const StiffnessError& e) {
        throw StiffnessError(std::string(e.what()) + "; try a smaller eps or a looser tol");
    }
    TwoLevelTrajectory out;
    out.times = tr.times;
    out.states = tr.states;
    out.steps = tr.steps;
    out.max_norm_drift = tr.max_norm_drift;
    const auto gamma = cumulative_omega(model, fz, out.times);
    for (std::size_t i = 0; i < out.times.size(); ++i) {
        const double b = model.coupling(z, out.times[i]);
        out.energies.push_back(oracle::bo_ground_energy(a, model.beta * model.schedule.g(out.times[i]), fz));
        // gamma is measured from t0; shift when the first sample is later
        out.dynamic_phase.push_back(-gamma[i]);
        const State2 v = ground_vector(a, b);
        out.ground_overlap.push_back(std::conj(v[0]) * out.states[i][0] +
                                     std::conj(v[1]) * out.states[i][1]);
    }
    if (out.times.front() > t0) {
        const double off = -tail_integral(model, fz, t0, out.times.front()) -
                           a * (out.times.front() - t0);
        for (auto& p : out.dynamic_phase) p += off;
    }
    return out;
}

TwoLevelTrajectory evolve_dipole(const DipoleModel& model, double z, double tol) {
    return evolve_dipole(model, z, uniform_times(model.t_start(), model.t_end(), 2001), tol);
}

PhaseTrajectory relative_phase_trajectory(const DipoleModel& model, std::size_t n_samples) {
    model.validate();
    const auto times = uniform_times(model.t_start(), model.t_end(), n_samples);
    const auto b1 = evolve_dipole(model, model.z1, times, model.tol);
    const auto b2 = evolve_dipole(model, model.z2, times, model.tol);
    PhaseTrajectory p;
    p.times = times;
    p.max_norm_drift = std::max(b1.max_norm_drift, b2.max_norm_drift);
    State2 prev1 = ground_vector(model.alpha, 0.0), prev2 = prev1;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        p.g.push_back(model.schedule.g(t));
        p.E1.push_back(b1.energies[i]);
        p.E2.push_back(b2.energies[i]);
        State2 v1 = ground_vector(model.alpha, model.coupling(model.z1, t));
        State2 v2 = ground_vector(model.alpha, model.coupling(model.z2, t));
        // continuity gauge: keep each eigenvector's overlap with its predecessor positive
        if ((v1[0] * prev1[0] + v1[1] * prev1[1]).real() < 0.0) v1 = {-v1[0], -v1[1]};
        if ((v2[0] * prev2[0] + v2[1] * prev2[1]).real() < 0.0) v2 = {-v2[0], -v2[1]};
        prev1 = v1;
        prev2 = v2;
        p.R.push_back((v1[0] * v2[0] + v1[1] * v2[1]).real());
        const auto& s1 = b1.states[i];
        const auto& s2 = b2.states[i];
        p.total_factor.push_back(std::conj(s1[0]) * s2[0] + std::conj(s1[1]) * s2[1]);
        p.bo_phase.push_back(b1.dynamic_phase[i] - b2.dynamic_phase[i]);
    }
    const cplx fin = p.total_factor.back();
    p.r_final = std::abs(fin);
    p.phi_rel_final = std::arg(fin);
    p.bo_phase_final = p.bo_phase.back();
    p.R_measured_final = (fin * std::polar(1.0, -p.bo_phase_final)).real();
    p.phi0 = p.R_measured_final < 0.0 ? pi : 0.0;
    p.phase_residual = wrap_phase(p.phi_rel_final - p.phi0 - p.bo_phase_final);
    if (p.r_final < 0.99) {
        std::ostringstream os;
        os << "adiabaticity failure: |R(t_final)| = " << p.r_final
           << " < 0.99 at alpha/eps = " << model.schedule.adiabaticity(model.alpha);
        throw AdiabaticityError(os.str(), p.r_final);
    }
    return p;
}

GedankenSummary gedanken_run(const DipoleModel& model, double tolerance) {
    GedankenSummary s;
    const auto traj = relative_phase_trajectory(model);
    s.phi_exact = traj.phi_rel_final;
    s.phi0 = traj.phi0;
    s.r_final = traj.r_final;
    const auto& sc = model.schedule;
    const double f2 = model.f(model.z2);
    s.plateau_oracle = oracle::bo_phase_shift(model.alpha, model.beta * sc.g0, f2, sc.t2 - sc.t1);
    s.tail_numeric = tail_integral(model, f2, sc.t_on(), sc.t1) + tail_integral(model, f2, sc.t2, sc.t_off());

    auto inner = [&](double t) {
        if (sc.g(t) == 0.0) return 0.0;
        return path_quad(model, [&](double z) { return bo_force(model, z, t); }, 1e-10);
    };
    s.path_integral = quad(inner, sc.t_on(), sc.t1, 1e-9).value +
                      quad(inner, sc.t1, sc.t2, 1e-9).value +
                      quad(inner, sc.t2, sc.t_off(), 1e-9).value;

    s.delta_oracle = wrap_phase(s.phi_exact - s.phi0 - (s.plateau_oracle + s.tail_numeric));
    s.delta_path = wrap_phase(s.phi_exact - s.phi0 - s.path_integral);
    s.fringe_shift = std::fmod(s.phi_exact + 2.0 * pi, 2.0 * pi);
    s.consistent = std::abs(s.delta_oracle) <= tolerance && std::abs(s.delta_path) <= tolerance;
    if (!s.consistent) {
        std::ostringstream os;
        os.precision(10);
        os << "three-way disagreement: exact=" << s.phi_exact << " phi0=" << s.phi0
           << " oracle+tails=" << s.plateau_oracle + s.tail_numeric
           << " path_integral=" << s.path_integral << " tolerance=" << tolerance;
        throw ConsistencyError(os.str());
    }
    return s;
}

} // namespace qphase::dipole
