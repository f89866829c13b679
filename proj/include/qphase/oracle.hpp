#pragma once

#include "qphase/core.hpp"

#include <string>
#include <utility>

namespace qphase::oracle {

// hbar^2 / (2 m_e) in eV * Angstrom^2 (CODATA, rounded to 5 digits).
inline constexpr double hbar2_over_2me_eV_A2 = 3.8100;
// hbar in eV * s (CODATA 2018).
inline constexpr double hbar_eV_s = 6.582119569e-16;

struct DeltaScatterCoeffs {
    cplx A;
    cplx B;
    cplx A_shifted;  // e^{2ipL} A, reflection off a barrier displaced to x = L
    double alpha_tilde = 0.0;
    double p = 0.0;
    double shift_L = 0.0;
};

// alpha_tilde = +inf selects the impenetrable limit A = -1, B = 0.
DeltaScatterCoeffs delta_coeffs(double alpha_tilde, double p, double shift_L = 0.0);

double ramp_duration(double W, double v0);
cplx ramp_overlap(double W, double v0, double p0, double L, double t);

struct PrivatePotential {
    cplx value;
    double far_term = 0.0;  // magnitude of the x = L contribution, v0^2 / (W alpha)
    bool narrow_packet = false;  // W < 10 L
};

PrivatePotential private_potential_scatter(double W, double v0, double p0, double L,
                                           double alpha_tilde, double mass = 1.0);

struct ForcePhase {
    double force = 0.0;
    double phase = 0.0;
};

ForcePhase average_force_scatter(double p0, double T, double L);

double bo_ground_energy(double alpha, double g, double f);
double bo_polarization(double alpha, double g, double f);
double bo_excited_energy(double alpha, double g, double f);
double bo_excited_polarization(double alpha, double g, double f);

double bo_phase_shift(double alpha, double g0, double f_z2, double T_plateau);

struct StationaryPhase {
    cplx plus;
    cplx minus;
    double gamma = 0.0;
    double omega = 0.0;
    double cos_theta = 1.0;
    bool weakly_adiabatic = false;  // alpha / eps < 10
};

// gamma(t) = integral of omega from the schedule switch-on time t1'.
double schedule_gamma(double alpha, const SwitchingSchedule& s, double f, double t);
StationaryPhase stationary_phase_I(double alpha, const SwitchingSchedule& s, double f, double t);

struct TwoDipoleBalance {
    double X = 0.0;  // g0^2 f^2 at the balance point
    double gf = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double dU = 0.0;
    double residual = 0.0;
    bool any_X = false;  // identical dipoles: balance holds for every X
};

TwoDipoleBalance two_dipole_balance(double alpha1, double alpha2, double beta1, double beta2);

struct GapEstimate {
    double energy_eV = 0.0;
    double rate_per_s = 0.0;
    double quoted_energy_eV = 1e-2;
    double quoted_rate_per_s = 1e13;
};

GapEstimate double_well_gap_estimate(double r_angstrom);

} // namespace qphase::oracle
