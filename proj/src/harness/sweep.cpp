#include "internal.hpp"

#include "qphase/errors.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace qphase::harness {
namespace {

using detail::json;

constexpr double max_cells_without_override = 1e5;

std::vector<std::string> split_values(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw ConfigError("empty value in sweep axis '" + s + "'");
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

std::string target_of(const Config& spec) {
    const std::string* t = spec.find("sweep", "target");
    if (t) {
        if (*t != "scatter" && *t != "dipole") throw ConfigError("[sweep] target must be scatter or dipole");
        return *t;
    }
    return spec.has("dipole") || spec.has("schedule") ? "dipole" : "scatter";
}

} // namespace

std::vector<SweepCell> expand_sweep(const Config& spec, bool override_validation) {
    Config base = spec;
    base.erase("sweep");
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    if (spec.has("sweep")) {
        for (const auto& [key, value] : spec.sections().at("sweep")) {
            if (key == "target" || key == "max_parallel") continue;
            const auto dot = key.find('.');
            if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
                throw ConfigError("sweep axis '" + key + "' must be section.key");
            axes.emplace_back(key, split_values(value));
        }
    }
    double total = 1.0;
    for (const auto& a : axes) total *= static_cast<double>(a.second.size());
    if (total > max_cells_without_override && !override_validation)
        throw ConfigError("sweep has " + std::to_string(static_cast<long long>(total)) +
                          " runs, more than 100000; use --override-validation");
    const auto n = static_cast<std::size_t>(total);
    std::vector<SweepCell> cells;
    cells.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
        SweepCell cell;
        cell.config = base;
        std::size_t rest = c;
        // last axis varies fastest
        std::vector<std::size_t> idx(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            idx[k] = rest % axes[k].second.size();
            rest /= axes[k].second.size();
        }
        for (std::size_t k = 0; k < axes.size(); ++k) {
            const auto& key = axes[k].first;
            const auto& value = axes[k].second[idx[k]];
            const auto dot = key.find('.');
            cell.config.set(key.substr(0, dot), key.substr(dot + 1), value);
            cell.assignments.emplace_back(key, value);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

int cmd_sweep(const std::filesystem::path& spec_path, const RunOptions& opt) {
    const auto started = std::chrono::system_clock::now();
    try {
        const auto spec = Config::load(spec_path);
        const std::string target = target_of(spec);
        const auto cells = expand_sweep(spec, opt.override_validation);
        int parallel = opt.max_parallel > 0 ? opt.max_parallel : spec.get_int("sweep", "max_parallel", 1);
        if (parallel < 1) throw ConfigError("max_parallel must be >= 1");
        std::cout << "sweep: " << cells.size() << " run(s), target " << target << ", max_parallel "
                  << parallel << "\n";

        std::vector<RunOutcome> results(cells.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
                try {
                    results[i] = target == "scatter" ? run_scatter(cells[i].config, opt)
                                                     : run_dipole(cells[i].config, opt);
                } catch (const std::exception& e) {
                    results[i].exit_code = exit_code_for(e);
                    results[i].message = e.what();
                    results[i].run_id = cells[i].config.run_id();
                }
            }
        };
        const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(parallel), cells.size());
        std::vector<std::thread> pool;
        for (std::size_t k = 1; k < nthreads; ++k) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        std::vector<std::string> scalar_names;
        if (target == "scatter")
            scalar_names = {"final_phase", "phase_error", "ramp_sup_error", "absorbed_probability",
                            "max_norm_drift", "max_overlap_modulus"};
        else
            scalar_names = {"phi_rel_final", "phi0", "r_final", "delta_oracle", "delta_path",
                            "max_norm_drift"};
        std::vector<std::string> columns{"cell", "run_id", "status", "exit_code"};
        if (!cells.empty())
            for (const auto& a : cells.front().assignments) columns.push_back(a.first);
        for (const auto& s : scalar_names) columns.push_back(s);
        CsvTable index(columns);
        json runs = json::array();
        std::size_t failures = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& r = results[i];
            std::vector<std::string> row{std::to_string(i), r.run_id,
                                         r.exit_code == exit_ok ? "ok" : "failed",
                                         std::to_string(r.exit_code)};
            for (const auto& a : cells[i].assignments) row.push_back(a.second);
            for (const auto& s : scalar_names) {
                auto it = r.scalars.find(s);
                row.push_back(it == r.scalars.end() ? "" : format_double(it->second));
            }
            index.add_row(row);
            json entry{{"cell", i}, {"run_id", r.run_id}, {"exit_code", r.exit_code}};
            if (!r.message.empty()) entry["message"] = r.message;
            runs.push_back(entry);
            if (r.exit_code != exit_ok) {
                ++failures;
                std::cerr << "cell " << i << " failed (exit " << r.exit_code << "): " << r.message << "\n";
            }
        }

        Config keyed = spec;
        keyed.set("sweep", "command", "sweep");
        detail::ManifestInfo info;
        info.command = "sweep";
        info.run_id = keyed.run_id();
        info.config = &spec;
        info.started = started;
        const auto dir = detail::run_directory(opt.out_root, "sweep-" + info.run_id);
        write_file(dir / "index.csv", index.str());
        info.outputs.push_back("index.csv");
        info.convergence = {{"cells", runs}, {"failures", failures}};
        info.finished = std::chrono::system_clock::now();
        detail::write_manifest(dir, info);
        std::cout << "sweep index -> " << (dir / "index.csv").string() << " (" << failures
                  << " failed)\n";
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace qphase::harness
