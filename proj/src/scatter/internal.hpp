#pragma once

#include "qphase/scatter.hpp"

#include <cstddef>
#include <vector>

namespace qphase::scatter::detail {

// Multiplicative cos^2-ramped absorbing layers at both grid ends.
class Absorber {
public:
    Absorber(const Grid1D& grid, double fraction, double strength, double dt);
    // Returns the probability removed (already multiplied by dx).
    double apply(std::vector<cplx>& psi) const;

private:
    std::size_t n_ = 0;
    std::size_t layer_ = 0;
    double dx_ = 0.0;
    std::vector<double> left_, right_;
};

struct Window {
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::size_t size() const { return hi - lo; }
};

Window support(const std::vector<double>& v);
double momentum_fd(const std::vector<cplx>& psi);

struct SingleRun {
    std::vector<double> times;
    std::vector<double> momentum;
    std::vector<double> probe_density;
    double absorbed = 0.0;
};

// One branch under V from the model's initial packet.
SingleRun run_single(const ScatteringModel& model, const std::vector<double>& V, double t_final,
                     int sample_every, std::size_t probe_index);

} // namespace qphase::scatter::detail
