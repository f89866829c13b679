#include <doctest.h>

#include "scatter_fixtures.hpp"

#include "qphase/errors.hpp"
#include "qphase/oracle.hpp"
#include "qphase/scatter.hpp"

#include <cmath>
#include <numeric>

using namespace qphase;
using namespace qphase::scatter;
using fixtures::medium_model;
using fixtures::small_model;

namespace {

// Ideal delta: psi continuous, psi'(0+) - psi'(0-) = alpha_tilde psi(0).
void ideal_delta(double alpha_tilde, double p, cplx& A, cplx& B) {
    // 1 + A = B,  i p B - i p (1 - A) = alpha_tilde B
    const cplx ip(0, p);
    B = 2.0 * ip / (2.0 * ip - alpha_tilde);
    A = B - 1.0;
}

const ScatteringReport& small_report() {
    static const ScatteringReport r = run_scattering(small_model(), {}, 5);
    return r;
}

const ScatteringReport& medium_report() {
    static const ScatteringReport r = run_scattering(medium_model(), {}, 5);
    return r;
}

} // namespace

TEST_SUITE("potentials") {
    TEST_CASE("unit-area bumps and lattice translation") {
        const auto m = small_model();
        const auto pots = build_branch_potentials(m);
        const double dx = m.grid.dx();
        const double area = std::accumulate(pots.V1.begin(), pots.V1.end(), 0.0) * dx;
        CHECK(std::abs(area - m.alpha_tilde / (2 * m.mass)) < 1e-8);
        const auto shift = static_cast<std::size_t>(std::lround(m.L / dx));
        for (std::size_t i = 0; i < m.grid.size(); ++i) {
            const double x = m.grid.x(i);
            if (std::abs(x) > 3 * m.delta_width) CHECK(pots.V1[i] == 0.0);
            if (i >= shift) CHECK(pots.V2[i] == pots.V1[i - shift]);
        }
    }
    TEST_CASE("hard wall added to both branches") {
        auto m = small_model();
        m.barrier_L1 = 0.5;
        const auto pots = build_branch_potentials(m);
        const auto i = m.grid.index_of(0.75);
        CHECK(pots.wall[i] > 0.0);
        CHECK(pots.V1[i] == pots.V2[i]);
    }
}

TEST_SUITE("validation") {
    TEST_CASE("W >= 10L") {
        auto m = small_model();
        m.W = 5.0;
        m.grid = default_grid(m.L, m.W, 200, m.margin);
        try {
            m.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("W >= 10L") != std::string::npos);
        }
        m.relax_validation = true;
        const auto w = m.validate();
        CHECK(!w.empty());
    }
    TEST_CASE("delta width bound") {
        auto m = small_model();
        m.delta_width = 0.1;
        CHECK_THROWS_AS(m.validate(), ConfigError);
    }
    TEST_CASE("grid must reach [-3W, L+3W]") {
        auto m = small_model();
        m.grid = Grid1D::make(-20, 20, 8192);
        CHECK_THROWS_AS(m.validate(), ConfigError);
    }
    TEST_CASE("barrier position inside (0, L)") {
        auto m = small_model();
        m.barrier_L1 = 1.5;
        CHECK_THROWS_AS(m.validate(), ConfigError);
    }
    TEST_CASE("coarse dt") {
        auto m = small_model();
        m.dt = 0.1;
        CHECK_THROWS_AS(m.validate(), ConfigError);
    }
}

TEST_SUITE("stationary") {
    TEST_CASE("regularised delta matches the ideal-delta matching conditions") {
        for (double a : {2.0, 50.0, 200.0}) {
            cplx A, B;
            ideal_delta(a, 1.0, A, B);
            const auto s = stationary_scatter(a, 1.0, 1e-4);
            CAPTURE(a);
            CHECK(std::abs(s.A - A) / std::abs(A) < 1e-2);
            CHECK(std::abs(s.B - B) / std::abs(B) < 1e-2);
            const auto o = oracle::delta_coeffs(a, 1.0);
            CHECK(std::abs(o.A - A) < 1e-14);
        }
    }
    TEST_CASE("transmission error is first order in the bump width") {
        cplx A, B;
        ideal_delta(200.0, 1.0, A, B);
        const double e1 = std::abs(stationary_scatter(200.0, 1.0, 4e-4).B - B);
        const double e2 = std::abs(stationary_scatter(200.0, 1.0, 2e-4).B - B);
        CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
    }
    TEST_CASE("regularisation study converges towards the ideal delta") {
        const auto r = regularization_study(200.0, 1.0, 0.01);
        CHECK(r.accepted);
        CHECK(r.A_rel_error_extrapolated <= r.A_rel_error_w0 + 1e-12);
    }
}

TEST_SUITE("run_scattering") {
    TEST_CASE("initial packet") {
        const auto m = small_model();
        const auto f = initial_packet(m);
        CHECK(f.norm2() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(measured_fwhm(f) == doctest::Approx(m.W).epsilon(1e-3));
    }
    TEST_CASE("overlap bounded and starts at one") {
        const auto& r = medium_report();
        REQUIRE(!r.overlap.empty());
        CHECK(std::abs(r.overlap.front() - cplx(1, 0)) < 1e-6);
        for (const auto& d : r.overlap) CHECK(std::abs(d) <= 1 + 1e-10);
        CHECK(r.max_norm_drift < 1e-9);
        CHECK(r.absorbed_probability < 1e-2);
    }
    TEST_CASE("final phase near 2 p0 L") {
        CHECK(std::abs(std::remainder(small_report().final_phase - pi, 2 * pi)) < 0.05);
        CHECK(std::abs(std::remainder(medium_report().final_phase - pi, 2 * pi)) < 0.05);
    }
    TEST_CASE("derivative identity") {
        const auto& r = medium_report();
        CHECK(r.absorbed_probability < 1e-6);
        CHECK(r.max_fd_mismatch < 1e-4);
    }
    TEST_CASE("private potential vanishes before arrival") {
        CHECK(std::abs(small_report().private_potential.front()) < 1e-6);
        CHECK(std::abs(medium_report().private_potential.front()) < 1e-6);
    }
    TEST_CASE("after reflection: private potential small and decaying, coherence restored") {
        const auto m = acceptance_model();
        const auto r = run_scattering(m, 64.0, 50);
        const auto n = r.times.size();
        CHECK(std::abs(r.private_potential[n - 1]) < 1e-3);
        CHECK(std::abs(r.private_potential[n - 1]) < std::abs(r.private_potential[n - 20]));
        CHECK(r.deficit.back() < 1e-2);
        CHECK(r.variance.back() == 0.0);
    }
    TEST_CASE("uncertainty series endpoints and midpoint") {
        const auto& r = small_report();
        const auto m = small_model();
        const auto u = phase_uncertainty_series(r, m);
        CHECK(u.front().variance == 0.0);
        CHECK(u.front().deficit < 1e-6);
        CHECK(u.back().variance == 0.0);
        for (const auto& p : u) {
            CHECK(p.variance >= 0.0);
            if (p.t > r.ramp_start + 0.05 * r.T && p.t < r.ramp_start + 0.95 * r.T) {
                CHECK(p.variance > 0.0);
                CHECK(p.deficit > 0.0);
            }
        }
        ScatteringReport mid;
        mid.times = {r.ramp_start + 0.5 * r.T};
        mid.overlap = {cplx(0, 0)};
        mid.ramp_start = r.ramp_start;
        mid.T = r.T;
        const auto h = phase_uncertainty_series(mid, m);
        CHECK(h[0].variance == doctest::Approx(pi * pi / 4));
        CHECK(h[0].deficit == 1.0);
    }
    TEST_CASE("weak barrier leaves the overlap at one") {
        const auto m = medium_model(1e-6);
        const auto r = run_scattering(m, m.ramp_start() + m.T(), 20);
        CHECK(r.absorbed_probability < 1e-7);
        for (const auto& d : r.overlap) CHECK(std::abs(d - cplx(1, 0)) < 1e-6);
    }
    TEST_CASE("trivial phase 2 p0 L = 2 pi") {
        auto m = medium_model();
        m.p0 = pi;
        m.dt = 0.01;
        m.delta_width = 0.005;
        m.grid = default_grid(m.L, m.W, 400, m.margin);
        const auto r = run_scattering(m, {}, 10);
        CHECK(std::abs(std::remainder(r.final_phase, 2 * pi)) < 0.05);
        CHECK(std::abs(r.final_overlap) > 0.95);
    }
    TEST_CASE("t_final shorter than the ramp is rejected") {
        CHECK_THROWS(run_scattering(small_model(), 1.0, 5));
    }
}

TEST_SUITE("probes") {
    TEST_CASE("public potential probe") {
        const auto m = small_model();
        CHECK(public_potential_probe(m, 0.0, -2.0).phase == 0.0);
        const auto p = public_potential_probe(m, 1e-2, -2.0);
        CHECK(p.expected == doctest::Approx(1e-2 / m.v0()));
        CHECK(std::abs(p.phase / p.expected - 1) < 0.05);
        // only the transmitted fraction |B|^2 of branch 1 reaches x > 0
        const double leak = std::norm(oracle::delta_coeffs(m.alpha_tilde, m.p0).B);
        const auto beyond = public_potential_probe(m, 1e-2, 0.5, ProbeBranch::branch1);
        CHECK(std::abs(beyond.phase) < 2 * leak * p.expected);
        CHECK(public_potential_probe(m, 0.2, -2.0).weak_coupling_warning);
        CHECK_THROWS_AS(public_potential_probe(m, 1e-2, 0.0), ConfigError);
    }
    TEST_CASE("barrier variant at p0 L1 = pi / 2") {
        ScatteringModel m;
        m.W = 20.0;
        m.L = 2.0;
        m.barrier_L1 = 1.0;
        m.grid = default_grid(m.L, m.W, 800, m.margin);
        const auto r = barrier_variant_phase(m);
        CHECK(std::abs(std::remainder(r.phase - pi, 2 * pi)) < 0.05 * pi);
    }
    TEST_CASE("single-position path integral uses constant force") {
        const auto m = medium_model();
        const auto r = momentum_transfer_and_path_integral(m, {0.5});
        REQUIRE(r.force_map.size() == 1);
        CHECK(r.phase_estimate == doctest::Approx(r.force_map[0].force * r.T * m.L));
        CHECK(std::abs(r.phase_estimate / pi - 1) < 0.05);
    }
    TEST_CASE("unsorted positions rejected") {
        CHECK_THROWS_AS(momentum_transfer_and_path_integral(small_model(), {0.6, 0.2}), DomainError);
    }
}

TEST_SUITE("displacement") {
    TEST_CASE("disentangled superpositions") {
        const auto m = small_model();
        const auto s = evolve_branches(m, 0.0);
        HeavySuperposition h;
        const auto a = displacement_expectation(s, h, m.L);
        CHECK(std::abs(a.position_route - cplx(0.5, 0)) < 1e-9);
        h.phi_rel = pi;
        const auto b = displacement_expectation(s, h, m.L);
        CHECK(std::abs(b.position_route - cplx(-0.5, 0)) < 1e-9);
        CHECK(std::abs(b.fourier_route - b.position_route) < 1e-9);
    }
    TEST_CASE("entangled state gives half the overlap by both routes") {
        const auto m = small_model();
        const double t = m.ramp_start() + 0.4 * m.T();
        const auto s = evolve_branches(m, t);
        const cplx D = [&] {
            cplx acc;
            for (std::size_t i = 0; i < s.phi1.values.size(); ++i)
                acc += std::conj(s.phi1.values[i]) * s.phi2.values[i];
            return acc * s.phi1.grid.dx();
        }();
        const auto r = displacement_expectation(s, HeavySuperposition{}, m.L);
        CHECK(std::abs(r.position_route - 0.5 * D) < 1e-6);
        CHECK(std::abs(r.fourier_route - r.position_route) < 1e-6);
    }
    TEST_CASE("overlapping heavy packets rejected") {
        const auto m = small_model();
        HeavySuperposition h;
        h.sigma = 0.5;
        CHECK_THROWS_AS(displacement_expectation(evolve_branches(m, 0.0), h, m.L), DomainError);
    }
}

TEST_SUITE("phase_gradient") {
    TEST_CASE("plane wave, constant, quadratic") {
        const auto a = phase_gradient_check(0.005, [](double x) { return 3 * x; }, 0.3, 1.0);
        CHECK(a.mean_momentum == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(a.gradient_at_center == doctest::Approx(3.0).epsilon(1e-9));
        const auto b = phase_gradient_check(0.005, [](double) { return 1.0; }, 0.3, 1.0);
        CHECK(std::abs(b.mean_momentum) < 1e-9);
        const double k = 2.0, c = 5.0, x0 = 0.4;
        const auto q = phase_gradient_check(0.005, [=](double x) { return k * x + c * x * x; }, x0, 1.0);
        CHECK(q.mean_momentum == doctest::Approx(k + 2 * c * x0).epsilon(1e-6));
        CHECK(q.gradient_at_center == doctest::Approx(k + 2 * c * x0).epsilon(1e-6));
        CHECK_THROWS_AS(phase_gradient_check(0.1, [](double) { return 0.0; }, 0, 1), DomainError);
    }
}
