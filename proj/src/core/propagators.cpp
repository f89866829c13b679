#include "qphase/propagators.hpp"
#include "qphase/errors.hpp"
#include "qphase/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace qphase {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

CrankNicolson::CrankNicolson(const Grid1D& grid, const std::vector<double>& V, double dt,
                             double mass)
    : grid_(grid), dt_(dt) {
    if (V.size() != grid.size()) throw ConfigError("potential does not match grid");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    const std::size_t n = grid.size();
    const double dx = grid.dx();
    const double kin = 1.0 / (mass * dx * dx);
    beta_ = cplx(0.0, -dt * kin / 4.0);
    b_.resize(n);
    m_.resize(n);
    c_.resize(n);
    cplx c_prev(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(V[i])) throw NumericError("non-finite potential");
        b_[i] = cplx(1.0, 0.5 * dt * (kin + V[i]));
        const cplx u = b_[i] - beta_ * c_prev;
        m_[i] = 1.0 / u;
        c_[i] = beta_ * m_[i];
        c_prev = c_[i];
    }
}

void CrankNicolson::step(std::vector<cplx>& psi, std::vector<cplx>& work) const {
    const auto& k = kernels::active();
    const std::size_t n = b_.size();
    work.resize(n);
    k.cn_forward(psi.data(), b_.data(), beta_, m_.data(), work.data(), n);
    k.cn_backward(psi.data(), work.data(), c_.data(), n);
}

void CrankNicolson::step_pair(const CrankNicolson& a, const CrankNicolson& b,
                              std::vector<cplx>& psi1, std::vector<cplx>& psi2,
                              std::vector<cplx>& work1, std::vector<cplx>& work2) {
    if (!(a.grid_ == b.grid_) || a.dt_ != b.dt_ || a.beta_ != b.beta_)
        throw ConfigError("paired Crank-Nicolson steps need matching grid, dt and mass");
    const auto& k = kernels::active();
    const std::size_t n = a.b_.size();
    work1.resize(n);
    work2.resize(n);
    k.cn_forward2(psi1.data(), psi2.data(), a.b_.data(), b.b_.data(), a.beta_, a.m_.data(),
                  b.m_.data(), work1.data(), work2.data(), n);
    k.cn_backward2(psi1.data(), psi2.data(), work1.data(), work2.data(), a.c_.data(), b.c_.data(),
                   n);
}

struct SpectralPropagator::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::vector<cplx> scratch;
};

SpectralPropagator::SpectralPropagator(const Grid1D& grid, const std::vector<double>& V, double dt,
                                       double mass)
    : grid_(grid), dt_(dt), plans_(std::make_unique<Plans>()) {
    if (V.size() != grid.size()) throw ConfigError("potential does not match grid");
    if (!(dt >= 0.0)) throw ConfigError("dt must be >= 0");
    const std::size_t n = grid.size();
    half_v_.resize(n);
    kinetic_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(V[i])) throw NumericError("non-finite potential");
        half_v_[i] = std::polar(1.0, -0.5 * dt * V[i]);
        const double k = grid.k(i);
        kinetic_[i] = std::polar(1.0 / static_cast<double>(n), -dt * k * k / (2.0 * mass));
    }
    plans_->scratch.resize(n);
    auto* buf = reinterpret_cast<fftw_complex*>(plans_->scratch.data());
    std::lock_guard<std::mutex> lock(planner_mutex());
    plans_->forward = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    plans_->backward =
        fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SpectralPropagator::~SpectralPropagator() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plans_->forward) fftw_destroy_plan(plans_->forward);
    if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

void SpectralPropagator::step(std::vector<cplx>& psi) const {
    if (psi.size() != grid_.size()) throw ConfigError("field does not match grid");
    const auto& k = kernels::active();
    const std::size_t n = psi.size();
    auto* buf = reinterpret_cast<fftw_complex*>(psi.data());
    k.cmul(psi.data(), half_v_.data(), n);
    fftw_execute_dft(plans_->forward, buf, buf);
    k.cmul(psi.data(), kinetic_.data(), n);
    fftw_execute_dft(plans_->backward, buf, buf);
    k.cmul(psi.data(), half_v_.data(), n);
}

ComplexField spectral_step(const ComplexField& field, const std::vector<double>& potential,
                           double dt) {
    if (potential.size() != field.grid.size() || field.values.size() != field.grid.size())
        throw ConfigError("grid mismatch between field and potential");
    if (!field.finite()) throw NumericError("non-finite field values");
    ComplexField out = field;
    if (dt == 0.0) return out;
    SpectralPropagator prop(field.grid, potential, dt);
    prop.step(out.values);
    if (!out.finite()) throw NumericError("spectral step produced non-finite values");
    return out;
}

std::vector<cplx> fourier_amplitudes(const ComplexField& field) {
    const std::size_t n = field.grid.size();
    std::vector<cplx> buf = field.values;
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return buf;
}

std::vector<double> momentum_density(const ComplexField& field) {
    const std::size_t n = field.grid.size();
    const auto buf = fourier_amplitudes(field);
    const double dx = field.grid.dx();
    const double dk = 2.0 * pi / (field.grid.x_max() - field.grid.x_min());
    // Parseval: sum |psi_k|^2 = n sum |psi_x|^2, so scale by dx/(n dk)
    const double s = dx / (static_cast<double>(n) * dk);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::norm(buf[i]) * s;
    return out;
}

double momentum_expectation(const ComplexField& field) {
    const auto rho = momentum_density(field);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        num += field.grid.k(i) * rho[i];
        den += rho[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

} // namespace qphase
