#pragma once

#include "qphase/core.hpp"
#include "qphase/numerics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qphase::dipole {

enum class CouplingKind { power_law, tabulated };
enum class DipoleState { ground, excited };

struct TabulatedCoupling;

struct SecondDipole {
    double alpha = 1.0;
    double beta = 1.0;
    DipoleState initial = DipoleState::excited;
};

// H = alpha sigma_1 + beta g(t) f(z) sigma_3, worked in the sigma_1 eigenbasis (|+>, |->)
// where sigma_3 is off-diagonal: H = [[alpha, b], [b, -alpha]] with b = beta g f.
struct DipoleModel {
    double alpha = 1.0;
    double beta = 1.0;
    CouplingKind kind = CouplingKind::power_law;
    double charge = 4.0;  // f = charge / z^2
    std::shared_ptr<const TabulatedCoupling> table;  // set via set_table
    double z1 = 1.0;
    double z2 = 2.0;
    double cage_radius = 0.1;  // f is masked to zero within this radius of z1, smooth over a second radius
    SwitchingSchedule schedule = SwitchingSchedule::make(1.0, 0.02, 0.0, 10.0);
    std::optional<SecondDipole> second;
    double tol = 1e-9;

    // Monotone cubic (PCHIP) interpolation; switches kind to tabulated.
    void set_table(std::vector<double> z, std::vector<double> f);
    double f(double z) const;
    double df(double z) const;
    double coupling(double z, double t) const { return beta * schedule.g(t) * f(z); }
    double t_start() const { return schedule.t_on(); }
    double t_end() const { return schedule.t_off(); }
    std::vector<std::string> validate() const;
    // z1, mask edges inside the path, z2: pieces on which f is smooth.
    std::vector<double> path_breaks() const;
};

// Integral of fn over z from z1 to z2, split at the cage-mask edges.
double path_quad(const DipoleModel& model, const std::function<double(double)>& fn, double tol);
cplx path_quad_complex(const DipoleModel& model, const std::function<cplx(double)>& fn, double tol);

// Acceptance configuration: alpha = 1, g(0) f(z2) = 1, eps = 0.02, plateau 10.
DipoleModel acceptance_dipole(double eps = 0.02, double plateau = 10.0);

struct TwoLevelTrajectory {
    std::vector<double> times;
    std::vector<State2> states;
    std::vector<double> energies;        // instantaneous ground energy
    std::vector<double> dynamic_phase;   // integral of the ground energy from t_start
    std::vector<cplx> ground_overlap;    // <E_g(t)|phi(t)>
    double max_norm_drift = 0.0;
    std::size_t steps = 0;
};

// Ground eigenvector in the sigma_1 basis; a + omega > 0 keeps it continuous in b.
State2 ground_vector(double alpha, double b);

TwoLevelTrajectory evolve_dipole(const DipoleModel& model, double z,
                                 const std::vector<double>& times, double tol);
TwoLevelTrajectory evolve_dipole(const DipoleModel& model, double z, double tol);

double bo_force(const DipoleModel& model, double z, double t);

struct PotentialDifference {
    double quadrature = 0.0;
    double closed_form = 0.0;
    double rel_gap = 0.0;
};

PotentialDifference private_potential_difference(const DipoleModel& model, double t);

struct PublicPotential {
    double first_order = 0.0;  // g <sigma_3>(z0) f(z_t)
    double exact_shift = 0.0;  // (E'_g - E_g(z0)) / eps from the exact two-level energy
    double gap = 0.0;          // eps * (exact_shift - first_order), O(eps^2)
};

PublicPotential public_potential_test(const DipoleModel& model, double z0, double epsilon,
                                      double z_t, double t);

struct EnergyCheck {
    double dE_exact = 0.0;
    double dE_force = 0.0;
};

EnergyCheck perturbation_energy_check(const DipoleModel& model, double z, double dz, double t);

struct PhaseTrajectory {
    std::vector<double> times;
    std::vector<double> g;
    std::vector<double> E1;
    std::vector<double> E2;
    std::vector<double> R;             // <E_1(t)|E_2(t)>, continuity gauge
    std::vector<cplx> total_factor;    // <phi_1(t)|phi_2(t)>
    std::vector<double> bo_phase;      // -integral of (E_2 - E_1)
    double r_final = 1.0;              // |<phi_1|phi_2>| at t_final
    double R_measured_final = 1.0;     // Re(total_factor e^{-i bo_phase}) at t_final
    double phi0 = 0.0;                 // 0 or pi
    double phi_rel_final = 0.0;        // arg total_factor(t_final)
    double bo_phase_final = 0.0;
    double phase_residual = 0.0;       // wrap(phi_rel - phi0 - bo_phase)
    double max_norm_drift = 0.0;
};

PhaseTrajectory relative_phase_trajectory(const DipoleModel& model, std::size_t n_samples = 2001);

struct Sigma3Coefficients {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 1.0;
};

Sigma3Coefficients heisenberg_sigma3(const DipoleModel& model, double z, double t);

// I'_+(z, t) = integral from t_start of g cos(theta) e^{i gamma}, integrated in gamma panels.
cplx inner_integral(const DipoleModel& model, double z, double t);

struct UncertaintyIntegrals {
    double I2 = 0.0;
    double I3 = 0.0;
    double delta_phi_sq = 0.0;  // I2^2 + I3^2
    double delta_phi = 0.0;     // sqrt of delta_phi_sq
};

UncertaintyIntegrals uncertainty_integrals(const DipoleModel& model, double t);

struct StationaryPhaseCheck {
    cplx numeric;
    cplx closed_form;
    double rel_gap = 0.0;
    double eps_over_omega = 0.0;
    double constant = 0.0;  // rel_gap / (eps / omega)
};

StationaryPhaseCheck stationary_phase_check(const DipoleModel& model, double z, double t);

struct TwoDipoleReport {
    double z_balance = 0.0;
    double gf_balance = 0.0;
    double residual = 0.0;           // |beta1 <s3^1> + beta2 <s3^2>| at the root, plateau g
    double dU = 0.0;                 // U_BO(z_balance) - U_BO(z1)
    double dU_closed_form = 0.0;
    double off_plateau_residual = 0.0;  // same balance at g = g(0)/2
    bool balance_fails_off_plateau = false;
};

TwoDipoleReport two_dipole_experiment(const DipoleModel& model);

struct GedankenSummary {
    double phi_exact = 0.0;          // measured arg <phi_1|phi_2>(t_final)
    double phi0 = 0.0;
    double plateau_oracle = 0.0;     // (sqrt(alpha^2 + g0^2 f^2) - alpha) * plateau
    double tail_numeric = 0.0;       // switching-ramp contribution by quadrature
    double path_integral = 0.0;      // double integral of <F> over z and t
    double delta_oracle = 0.0;       // wrapped differences against phi_exact
    double delta_path = 0.0;
    double r_final = 1.0;
    double fringe_shift = 0.0;       // phi_exact mod 2 pi in [0, 2 pi)
    bool consistent = false;
};

GedankenSummary gedanken_run(const DipoleModel& model, double tolerance = 2.0 * pi * 1e-2);

double wrap_phase(double a);

} // namespace qphase::dipole
