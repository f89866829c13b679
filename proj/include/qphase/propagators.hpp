#pragma once

#include "qphase/core.hpp"

#include <memory>
#include <vector>

namespace qphase {

// Implicit midpoint (Crank-Nicolson) step for H = -d^2/(2m dx^2) 3-point + V with
// zero Dirichlet ends. Factorization is computed once per (V, dt).
class CrankNicolson {
public:
    CrankNicolson(const Grid1D& grid, const std::vector<double>& V, double dt, double mass = 1.0);

    void step(std::vector<cplx>& psi, std::vector<cplx>& work) const;
    // Advances two branches with independent potentials but equal grid, dt and mass.
    static void step_pair(const CrankNicolson& a, const CrankNicolson& b, std::vector<cplx>& psi1,
                          std::vector<cplx>& psi2, std::vector<cplx>& work1,
                          std::vector<cplx>& work2);

    double dt() const { return dt_; }
    const Grid1D& grid() const { return grid_; }

private:
    Grid1D grid_;
    double dt_;
    cplx beta_;
    std::vector<cplx> b_, m_, c_;
};

// Symmetric split step exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2) on a periodic grid.
class SpectralPropagator {
public:
    SpectralPropagator(const Grid1D& grid, const std::vector<double>& V, double dt,
                       double mass = 1.0);
    ~SpectralPropagator();
    SpectralPropagator(const SpectralPropagator&) = delete;
    SpectralPropagator& operator=(const SpectralPropagator&) = delete;

    void step(std::vector<cplx>& psi) const;
    double dt() const { return dt_; }

private:
    struct Plans;
    Grid1D grid_;
    double dt_;
    std::vector<cplx> half_v_;
    std::vector<cplx> kinetic_;
    std::unique_ptr<Plans> plans_;
};

ComplexField spectral_step(const ComplexField& field, const std::vector<double>& potential,
                           double dt);

// Unnormalised forward DFT of the field values (FFT ordering).
std::vector<cplx> fourier_amplitudes(const ComplexField& field);

// Momentum-space density |psi(k)|^2 (FFT ordering) normalised so sum * dk = norm2.
std::vector<double> momentum_density(const ComplexField& field);
double momentum_expectation(const ComplexField& field);

} // namespace qphase
