#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qphase {

using cplx = std::complex<double>;

inline constexpr double hbar = 1.0;
inline constexpr double pi = 3.14159265358979323846;

struct UnitSystem {
    double mass_light = 1.0;

    double velocity(double p) const { return p / mass_light; }
    static UnitSystem make(double mass_light);
};

class Grid1D {
public:
    Grid1D() = default;
    static Grid1D make(double x_min, double x_max, std::size_t n_points);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double dx() const { return (x_max_ - x_min_) / static_cast<double>(n_); }
    double x(std::size_t i) const { return x_min_ + dx() * static_cast<double>(i); }
    // FFT ordering: 0, dk, ..., -dk
    double k(std::size_t i) const;
    double k_max() const;
    std::size_t index_of(double x) const;

    bool operator==(const Grid1D& o) const {
        return n_ == o.n_ && x_min_ == o.x_min_ && x_max_ == o.x_max_;
    }

private:
    double x_min_ = 0.0;
    double x_max_ = 1.0;
    std::size_t n_ = 16;
};

struct ComplexField {
    Grid1D grid;
    std::vector<cplx> values;

    ComplexField() = default;
    explicit ComplexField(const Grid1D& g) : grid(g), values(g.size()) {}

    double norm2() const;
    bool finite() const;
};

struct SwitchingSchedule {
    double g0 = 1.0;
    double eps = 0.02;
    double t1 = 0.0;
    double t2 = 10.0;
    double cutoff = 1e-6;

    static SwitchingSchedule make(double g0, double eps, double t1, double t2);

    double tau() const;
    double t_on() const { return t1 - tau(); }
    double t_off() const { return t2 + tau(); }
    double g(double t) const;
    double dg(double t) const;
    double adiabaticity(double alpha) const { return alpha / eps; }
};

} // namespace qphase
