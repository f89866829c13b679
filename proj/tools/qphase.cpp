#include "qphase/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace qphase::harness;

namespace {

// "--key value" or "--key=value" pairs left over after CLI11 parsing.
bool collect_params(const std::vector<std::string>& args, std::map<std::string, std::string>& out) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0 || a.size() < 3) {
            std::cerr << "error: expected --name value, got '" << a << "'\n";
            return false;
        }
        const auto eq = a.find('=');
        if (eq != std::string::npos) {
            out[a.substr(2, eq - 2)] = a.substr(eq + 1);
        } else if (i + 1 < args.size()) {
            out[a.substr(2)] = args[++i];
        } else {
            std::cerr << "error: missing value for " << a << "\n";
            return false;
        }
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qphase: scattering and dipole phase experiments"};
    app.require_subcommand(1);
    std::string config, out;
    RunOptions opt;
    int max_parallel = 0;
    app.add_flag("--override-validation", opt.override_validation,
                 "accept configs that break soft validation rules");
    app.add_option("--max-parallel", max_parallel, "concurrent sweep runs")->check(CLI::PositiveNumber);
    app.add_flag("--seedless", opt.seedless, "no-op: every run is deterministic");
    app.add_option("--out", out, "output root (default $QPHASE_OUT_DIR or ./qphase_out)");

    auto* scatter = app.add_subcommand("scatter", "two-branch scattering run");
    auto* dipole = app.add_subcommand("dipole", "particle-dipole run");
    auto* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
    auto* converge = app.add_subcommand("converge", "grid or tolerance refinement ladder");
    for (auto* sub : {scatter, dipole, sweep, converge}) {
        sub->add_option("--config", config, "config file")->required();
        sub->fallthrough();
    }
    auto* oracle = app.add_subcommand("oracle", "evaluate a closed-form formula");
    std::string formula;
    oracle->add_option("formula", formula, "formula name")->required();
    oracle->prefix_command();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_validation;
    }
    opt.max_parallel = max_parallel;
    opt.out_root = resolve_out_root(out);

    if (*scatter) return cmd_scatter(config, opt);
    if (*dipole) return cmd_dipole(config, opt);
    if (*sweep) return cmd_sweep(config, opt);
    if (*converge) return cmd_converge(config, opt, std::cout);
    std::map<std::string, std::string> params;
    if (!collect_params(oracle->remaining(), params)) return exit_validation;
    return cmd_oracle(formula, params, std::cout);
}
