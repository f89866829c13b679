#pragma once

#include "qphase/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qphase::scatter {

enum class PacketShape { flat_top, gaussian };

struct ScatteringModel {
    double alpha_tilde = 200.0;
    double L = 1.0;
    double W = 50.0;
    double p0 = pi / 2.0;
    double mass = 1.0;
    std::optional<double> barrier_L1;
    double delta_width = 0.01;
    PacketShape packet_shape = PacketShape::flat_top;
    int flat_top_order = 12;
    // Distance from the packet's leading half-maximum point to the origin at t = 0.
    double margin = 10.0;
    double dt = 0.02;
    Grid1D grid;
    double mask_fraction = 0.1;
    double mask_strength = 2.0;
    double wall_height_factor = 1e4;
    int wall_cells = 5;
    bool relax_validation = false;  // soft rules (W >= 10L, dt p0^2/2m <= 0.05) only warn

    double v0() const { return p0 / mass; }
    double alpha() const { return alpha_tilde / (2.0 * mass); }
    // W_eff / v0 with W_eff the density FWHM (equal to W by construction).
    double T() const { return W / v0(); }
    // Start of the reflection ramp of the overlap: midway between the two branch reflections.
    double ramp_start() const { return (margin + L) / v0(); }
    double default_t_final() const { return ramp_start() + T() + 2.0 * margin / v0(); }
    double packet_center() const { return -0.5 * W - margin; }

    std::vector<std::string> validate() const;  // throws ConfigError; returns warnings
};

// Grid with L/dx integral, 0 on a node, centred on [0, L] and covering [-3W, L+3W].
Grid1D default_grid(double L, double W, int cells_per_L, double margin = 10.0);
ScatteringModel acceptance_model(double W = 50.0, int cells_per_L = 400);

std::vector<double> delta_bump(const Grid1D& grid, double center, double width, double area);

struct BranchPotentials {
    std::vector<double> V1;
    std::vector<double> V2;
    std::vector<double> wall;  // shared hard-wall part (zeros if absent)
};

BranchPotentials build_branch_potentials(const ScatteringModel& model);

ComplexField initial_packet(const ScatteringModel& model);
double measured_fwhm(const ComplexField& field);

// Stationary scattering through a regularised delta by direct integration.
struct StationaryResult {
    cplx A;
    cplx B;
    double width = 0.0;
};

// alpha_tilde = 2 m alpha already carries the mass.
StationaryResult stationary_scatter(double alpha_tilde, double p, double width);

struct RegularizationStudy {
    double w0 = 0.0;
    StationaryResult at_w0, at_half, at_quarter;
    cplx A_extrapolated;
    cplx B_extrapolated;
    double A_rel_error_w0 = 0.0;
    double B_rel_error_w0 = 0.0;
    double A_rel_error_extrapolated = 0.0;
    double B_rel_error_extrapolated = 0.0;
    bool accepted = false;  // A at w0 within 1% of the closed form
};

RegularizationStudy regularization_study(double alpha_tilde, double p, double w0);

struct ConditionalWavefunction {
    ComplexField phi1;
    ComplexField phi2;
    double time = 0.0;
    double norm1 = 1.0;
    double norm2 = 1.0;
};

struct ScatteringReport {
    std::vector<double> times;
    std::vector<cplx> overlap;
    std::vector<double> phase_unwrapped;
    std::vector<cplx> private_potential;
    std::vector<cplx> overlap_derivative;  // centred finite difference of D
    std::vector<double> momentum_transfer;
    std::vector<double> variance;
    std::vector<double> deficit;
    std::vector<cplx> ramp_oracle;
    // Free incident density times W_eff at x = 0 and x = L; 1 on a uniform plateau.
    std::vector<double> incident_density;
    std::vector<double> incident_density_L;
    // Per-step series for matched-time comparisons.
    double step_dt = 0.0;
    std::vector<double> v_expect1;
    std::vector<double> v_expect2;

    double final_phase = 0.0;  // arg D(t_final) in (-pi, pi]
    double final_phase_unwrapped = 0.0;
    cplx final_overlap;
    double absorbed_probability = 0.0;
    double max_norm_drift = 0.0;
    double max_overlap_modulus = 0.0;
    double ramp_sup_error = 0.0;
    double ramp_start = 0.0;
    double T = 0.0;
    double W_eff_measured = 0.0;
    // Max relative error of P over the longest run of samples with both incident densities
    // within 5% of uniform.
    double plateau_private_potential_rel_error = 0.0;
    cplx plateau_private_potential;
    double plateau_t_begin = 0.0;
    double plateau_t_end = 0.0;
    double plateau_fraction = 0.0;  // uniform-incidence samples / samples inside the ramp
    double central_private_potential_rel_error = 0.0;  // over [ts + 0.2T, ts + 0.8T]
    double max_fd_mismatch = 0.0;
    double max_matched_v_difference = 0.0;
    double max_equal_time_v_difference = 0.0;
    double max_impulse_bound = 0.0;
    bool impulse_bound_violated = false;
    double reflection_rel_error = 0.0;
    std::size_t steps = 0;
    std::vector<std::string> warnings;
};

ConditionalWavefunction evolve_branches(const ScatteringModel& model, double t);

ScatteringReport run_scattering(const ScatteringModel& model, std::optional<double> t_final = {},
                                int sample_every = 5);

// |psi_free(x, t)|^2 * w_eff for the barrier-free incident packet.
std::vector<double> free_incident_density(const ScatteringModel& model,
                                          const std::vector<double>& times, double w_eff,
                                          double x = 0.0);

cplx private_potential_numeric(const ConditionalWavefunction& state, const ScatteringModel& model);
cplx private_potential_numeric(const ConditionalWavefunction& state, const BranchPotentials& pots);

enum class ProbeBranch { none, branch1, branch2 };

struct ProbeResult {
    double phase = 0.0;
    double expected = 0.0;  // epsilon / v0
    bool weak_coupling_warning = false;
};

ProbeResult public_potential_probe(const ScatteringModel& model, double epsilon,
                                   double probe_position, ProbeBranch branch = ProbeBranch::none);

struct ForcePoint {
    double x = 0.0;
    double force = 0.0;
    double fit_residual = 0.0;  // rms deviation from the linear fit / (2 p0)
    bool nonlinear = false;
};

struct PathIntegralResult {
    std::vector<ForcePoint> force_map;
    double phase_estimate = 0.0;
    double expected = 0.0;  // 2 p0 L
    double T = 0.0;
    std::vector<std::string> warnings;
};

PathIntegralResult momentum_transfer_and_path_integral(const ScatteringModel& model,
                                                       const std::vector<double>& positions);

struct BarrierVariantResult {
    double phase = 0.0;
    double expected = 0.0;  // 2 p0 L1 mod 2 pi in (-pi, pi]
    ScatteringReport report;
};

BarrierVariantResult barrier_variant_phase(const ScatteringModel& model);

struct HeavySuperposition {
    double sigma = 0.05;       // heavy packet width
    double phi_rel = 0.0;      // initial relative phase of psi2
    std::size_t n_points = 4096;
    double span = 0.0;         // heavy grid length, default 4L + 20 sigma
};

struct DisplacementResult {
    cplx position_route;
    cplx fourier_route;
    double packet_overlap = 0.0;
};

DisplacementResult displacement_expectation(const ConditionalWavefunction& state,
                                            const HeavySuperposition& heavy, double L);

struct GradientCheck {
    double mean_momentum = 0.0;
    double gradient_at_center = 0.0;
};

GradientCheck phase_gradient_check(double packet_width, const std::function<double(double)>& phase,
                                   double center, double L);

struct UncertaintyPoint {
    double t = 0.0;
    double variance = 0.0;
    double deficit = 0.0;
    double impulse_bound = 0.0;
    bool violated = false;
};

std::vector<UncertaintyPoint> phase_uncertainty_series(const ScatteringReport& report,
                                                       const ScatteringModel& model);

} // namespace qphase::scatter
