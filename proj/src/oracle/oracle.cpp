#include "qphase/oracle.hpp"
#include "qphase/errors.hpp"
#include "qphase/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qphase::oracle {

DeltaScatterCoeffs delta_coeffs(double alpha_tilde, double p, double shift_L) {
    if (!(alpha_tilde > 0.0)) throw DomainError("delta_coeffs: alpha_tilde must be > 0");
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("delta_coeffs: p must be > 0");
    if (!(shift_L >= 0.0)) throw DomainError("delta_coeffs: shift_L must be >= 0");
    DeltaScatterCoeffs c;
    c.alpha_tilde = alpha_tilde;
    c.p = p;
    c.shift_L = shift_L;
    if (std::isinf(alpha_tilde)) {
        c.A = cplx(-1.0, 0.0);
    } else {
        c.A = -1.0 / cplx(1.0, -2.0 * p / alpha_tilde);
    }
    c.B = 1.0 + c.A;
    c.A_shifted = std::polar(1.0, 2.0 * p * shift_L) * c.A;
    return c;
}

double ramp_duration(double W, double v0) {
    if (!(W > 0.0) || !(v0 > 0.0)) throw DomainError("ramp: W and v0 must be > 0");
    return W / v0;
}

cplx ramp_overlap(double W, double v0, double p0, double L, double t) {
    const double T = ramp_duration(W, v0);
    if (!(t >= 0.0 && t <= T)) {
        std::ostringstream msg;
        msg << "ramp_overlap: t=" << t << " outside [0, " << T << "]";
        throw DomainError(msg.str());
    }
    const double s = v0 * t / W;
    return (1.0 - s) + s * std::polar(1.0, 2.0 * p0 * L);
}

PrivatePotential private_potential_scatter(double W, double v0, double p0, double L,
                                           double alpha_tilde, double mass) {
    if (!(W > 0.0) || !(v0 > 0.0) || !(L > 0.0)) throw DomainError("W, v0, L must be > 0");
    PrivatePotential r;
    r.value = -(v0 / W) * (1.0 - std::polar(1.0, 2.0 * p0 * L));
    const double alpha = alpha_tilde / (2.0 * mass);
    r.far_term = std::isinf(alpha_tilde) ? 0.0 : v0 * v0 / (W * alpha);
    r.narrow_packet = W < 10.0 * L;
    return r;
}

ForcePhase average_force_scatter(double p0, double T, double L) {
    if (!(T > 0.0)) throw DomainError("average_force_scatter: T must be > 0");
    return {2.0 * p0 / T, 2.0 * p0 * L};
}

double bo_ground_energy(double alpha, double g, double f) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    return -std::hypot(alpha, g * f);
}

double bo_polarization(double alpha, double g, double f) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    return -(g * f) / std::hypot(alpha, g * f);
}

double bo_excited_energy(double alpha, double g, double f) { return -bo_ground_energy(alpha, g, f); }

double bo_excited_polarization(double alpha, double g, double f) {
    return -bo_polarization(alpha, g, f);
}

double bo_phase_shift(double alpha, double g0, double f_z2, double T_plateau) {
    if (alpha < 0.0 || g0 < 0.0 || f_z2 < 0.0 || T_plateau < 0.0)
        throw DomainError("bo_phase_shift arguments must be >= 0");
    const double b = g0 * f_z2;
    return b * b / (std::hypot(alpha, b) + alpha) * T_plateau;
}

double schedule_gamma(double alpha, const SwitchingSchedule& s, double f, double t) {
    if (t <= s.t_on()) return 0.0;
    auto omega = [&](double u) { return std::hypot(alpha, s.g(u) * f); };
    const double tol = 1e-13;
    double gamma = 0.0;
    const double a1 = std::min(t, s.t1);
    gamma += quad(omega, s.t_on(), a1, tol * std::max(1.0, alpha * (a1 - s.t_on()))).value;
    if (t > s.t1) gamma += std::hypot(alpha, s.g0 * f) * (std::min(t, s.t2) - s.t1);
    if (t > s.t2) {
        const double b = std::min(t, s.t_off());
        gamma += quad(omega, s.t2, b, tol * std::max(1.0, alpha * (b - s.t2))).value;
        if (t > s.t_off()) gamma += alpha * (t - s.t_off());
    }
    return gamma;
}

StationaryPhase stationary_phase_I(double alpha, const SwitchingSchedule& s, double f, double t) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    StationaryPhase r;
    r.weakly_adiabatic = s.adiabaticity(alpha) < 10.0;
    const double g = s.g(t);
    r.omega = std::hypot(alpha, g * f);
    r.cos_theta = alpha / r.omega;
    r.gamma = schedule_gamma(alpha, s, f, t);
    if (g == 0.0) return r;
    const cplx e = std::polar(1.0, r.gamma);
    const double amp = g * r.cos_theta / r.omega;
    r.plus = amp * e / cplx(0.0, 1.0);
    r.minus = amp * std::conj(e) / cplx(0.0, -1.0);
    return r;
}

TwoDipoleBalance two_dipole_balance(double alpha1, double alpha2, double beta1, double beta2) {
    if (!(alpha1 > 0.0) || !(alpha2 > 0.0) || !(beta1 > 0.0) || !(beta2 > 0.0))
        throw DomainError("two_dipole_balance: alphas and betas must be > 0");
    TwoDipoleBalance r;
    const double b1 = beta1 * beta1, b2 = beta2 * beta2;
    if (b1 == b2) {
        if (alpha1 != alpha2)
            throw InfeasibleError(
                "two-dipole balance infeasible: beta1 == beta2 requires alpha1 == alpha2 "
                "(eps1 != eps2 for every X)");
        r.any_X = true;
        r.eps1 = alpha1;
        r.eps2 = alpha2;
        return r;
    }
    const double num = b2 * b2 * alpha1 * alpha1 - b1 * b1 * alpha2 * alpha2;
    const double den = b1 * b2 * (b1 - b2);
    const double X = num / den;
    if (!(X >= 0.0)) {
        std::ostringstream msg;
        msg << "two-dipole balance infeasible: X = (beta2^4 alpha1^2 - beta1^4 alpha2^2) / "
               "(beta1^2 beta2^2 (beta1^2 - beta2^2)) = "
            << X << " < 0; need beta2^4 alpha1^2 - beta1^4 alpha2^2 and beta1^2 - beta2^2 of "
                    "the same sign";
        throw InfeasibleError(msg.str());
    }
    r.X = X;
    r.gf = std::sqrt(X);
    r.eps1 = std::sqrt(alpha1 * alpha1 + b1 * X);
    r.eps2 = std::sqrt(alpha2 * alpha2 + b2 * X);
    r.dU = (r.eps2 - alpha2) - (r.eps1 - alpha1);
    r.residual = std::abs(b1 * r.eps2 - b2 * r.eps1);
    return r;
}

GapEstimate double_well_gap_estimate(double r_angstrom) {
    if (!(r_angstrom > 0.0)) throw DomainError("r must be > 0");
    GapEstimate g;
    g.energy_eV = hbar2_over_2me_eV_A2 / (r_angstrom * r_angstrom);
    g.rate_per_s = g.energy_eV / hbar_eV_s;
    return g;
}

} // namespace qphase::oracle
