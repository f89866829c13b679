#include "internal.hpp"

#include "qphase/errors.hpp"
#include "qphase/oracle.hpp"

#include <algorithm>
#include <functional>
#include <iostream>

namespace qphase::harness {
namespace {

using detail::json;
using detail::complex_json;

struct Params {
    const std::map<std::string, std::string>& raw;
    json inputs = json::object();

    double operator()(const std::string& k) {
        auto it = raw.find(k);
        if (it == raw.end()) throw ConfigError("missing parameter --" + k);
        const double v = parse_number(it->second);
        inputs[k] = v;
        return v;
    }
    double operator()(const std::string& k, double def) {
        if (!raw.count(k)) {
            inputs[k] = def;
            return def;
        }
        return (*this)(k);
    }
};

struct Formula {
    std::vector<std::string> keys;  // accepted parameters
    std::string expression;
    std::function<json(Params&)> eval;
};

const std::map<std::string, Formula>& registry() {
    static const std::map<std::string, Formula> r{
        {"ramp-overlap",
         {{"W", "p0", "L", "t", "mass"},
          "D(t) = (1 - v0 t/W) + (v0 t/W) exp(2 i p0 L), v0 = p0/mass",
          [](Params& p) {
              const double W = p("W"), p0 = p("p0"), L = p("L"), t = p("t"), m = p("mass", 1.0);
              return complex_json(oracle::ramp_overlap(W, p0 / m, p0, L, t));
          }}},
        {"ramp-duration",
         {{"W", "v0"}, "T = W / v0", [](Params& p) { return json(oracle::ramp_duration(p("W"), p("v0"))); }}},
        {"delta-coeffs",
         {{"alpha_tilde", "p", "L"},
          "A = -1/(1 - 2ip/alpha_tilde), B = 1 + A, A_shifted = exp(2ipL) A",
          [](Params& p) {
              const double a = p("alpha_tilde"), k = p("p"), L = p("L", 0.0);
              const auto c = oracle::delta_coeffs(a, k, L);
              return json{{"A", complex_json(c.A)}, {"B", complex_json(c.B)},
                          {"A_shifted", complex_json(c.A_shifted)}};
          }}},
        {"private-potential",
         {{"W", "p0", "L", "alpha_tilde", "mass"},
          "P = -(v0/W)(1 - exp(2 i p0 L))",
          [](Params& p) {
              const double W = p("W"), p0 = p("p0"), L = p("L"), a = p("alpha_tilde"), m = p("mass", 1.0);
              const auto v = oracle::private_potential_scatter(W, p0 / m, p0, L, a, m);
              return json{{"value", complex_json(v.value)}, {"far_term", v.far_term},
                          {"narrow_packet", v.narrow_packet}};
          }}},
        {"average-force",
         {{"p0", "T", "L"},
          "F = 2 p0 / T, phase = F T L = 2 p0 L",
          [](Params& p) {
              const double p0 = p("p0"), T = p("T"), L = p("L");
              const auto f = oracle::average_force_scatter(p0, T, L);
              return json{{"force", f.force}, {"phase", f.phase}};
          }}},
        {"bo-energy",
         {{"alpha", "g", "f"}, "E_g = -sqrt(alpha^2 + g^2 f^2)",
          [](Params& p) { return json(oracle::bo_ground_energy(p("alpha"), p("g"), p("f"))); }}},
        {"bo-excited-energy",
         {{"alpha", "g", "f"}, "E_e = +sqrt(alpha^2 + g^2 f^2)",
          [](Params& p) { return json(oracle::bo_excited_energy(p("alpha"), p("g"), p("f"))); }}},
        {"bo-polarization",
         {{"alpha", "g", "f"}, "<sigma_3> = -g f / sqrt(alpha^2 + g^2 f^2)",
          [](Params& p) { return json(oracle::bo_polarization(p("alpha"), p("g"), p("f"))); }}},
        {"bo-phase",
         {{"alpha", "gf", "T"}, "phi = (sqrt(alpha^2 + (g f)^2) - alpha) T",
          [](Params& p) {
              const double a = p("alpha"), gf = p("gf"), T = p("T");
              return json(oracle::bo_phase_shift(a, gf, 1.0, T));
          }}},
        {"stationary-phase",
         {{"alpha", "g0", "eps", "t1", "t2", "f", "t"},
          "I'_+ = g cos(theta) exp(i gamma) / (i omega), I'_- = g cos(theta) exp(-i gamma) / (-i omega)",
          [](Params& p) {
              const double a = p("alpha");
              auto s = SwitchingSchedule::make(p("g0"), p("eps"), p("t1", 0.0), p("t2", 10.0));
              const auto r = oracle::stationary_phase_I(a, s, p("f"), p("t"));
              return json{{"plus", complex_json(r.plus)}, {"minus", complex_json(r.minus)},
                          {"gamma", r.gamma}, {"omega", r.omega}, {"cos_theta", r.cos_theta},
                          {"weakly_adiabatic", r.weakly_adiabatic}};
          }}},
        {"two-dipole-balance",
         {{"alpha1", "alpha2", "beta1", "beta2"},
          "beta1^2 eps2 = beta2^2 eps1, dU = (eps2 - alpha2) - (eps1 - alpha1)",
          [](Params& p) {
              const double a1 = p("alpha1"), a2 = p("alpha2"), b1 = p("beta1"), b2 = p("beta2");
              const auto b = oracle::two_dipole_balance(a1, a2, b1, b2);
              return json{{"X", b.X}, {"gf", b.gf}, {"eps1", b.eps1}, {"eps2", b.eps2},
                          {"dU", b.dU}, {"residual", b.residual}, {"any_X", b.any_X}};
          }}},
        {"gap-estimate",
         {{"r"}, "E = hbar^2 / (2 m_e r^2), rate = E / hbar",
          [](Params& p) {
              const auto g = oracle::double_well_gap_estimate(p("r"));
              return json{{"energy_eV", g.energy_eV}, {"rate_per_s", g.rate_per_s},
                          {"quoted_energy_eV", g.quoted_energy_eV},
                          {"quoted_rate_per_s", g.quoted_rate_per_s}};
          }}},
    };
    return r;
}

} // namespace

std::vector<std::string> oracle_formulas() {
    std::vector<std::string> out;
    for (const auto& kv : registry()) out.push_back(kv.first);
    return out;
}

int cmd_oracle(const std::string& formula, const std::map<std::string, std::string>& params,
               std::ostream& os) {
    const auto& reg = registry();
    auto it = reg.find(formula);
    if (it == reg.end()) {
        std::cerr << "error: unknown formula '" << formula << "'; known formulas:";
        for (const auto& name : oracle_formulas()) std::cerr << " " << name;
        std::cerr << "\n";
        return exit_validation;
    }
    try {
        for (const auto& kv : params) {
            const auto& keys = it->second.keys;
            if (std::find(keys.begin(), keys.end(), kv.first) == keys.end())
                throw ConfigError("formula " + formula + " does not take --" + kv.first);
        }
        Params p{params};
        json out;
        out["formula"] = formula;
        out["expression"] = it->second.expression;
        out["value"] = it->second.eval(p);
        out["inputs"] = p.inputs;
        os << detail::dump(out);
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace qphase::harness
