#pragma once

#include "qphase/dipole.hpp"
#include "qphase/scatter.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qphase::harness {

// Flat sectioned key=value text; see docs/config.md.
class Config {
public:
    using Section = std::map<std::string, std::string>;

    static Config parse(std::string_view text, const std::string& origin = "<config>");
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& section) const { return sections_.count(section) != 0; }
    bool has(const std::string& section, const std::string& key) const;
    const std::string* find(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
    void erase(const std::string& section);
    const std::map<std::string, Section>& sections() const { return sections_; }

    double get_double(const std::string& section, const std::string& key, double def) const;
    int get_int(const std::string& section, const std::string& key, int def) const;
    bool get_bool(const std::string& section, const std::string& key, bool def) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& def) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    // Sorted "[section]" / "key=value" lines; the hashed form of the config.
    std::string canonical() const;
    std::string run_id() const;

    // Throws ConfigError naming the first section or key outside the schema.
    void check_schema(const std::map<std::string, std::set<std::string>>& schema) const;

private:
    std::map<std::string, Section> sections_;
};

// Accepts decimal literals and the forms pi, a*pi, pi/b, a*pi/b.
double parse_number(const std::string& text);

std::string sha256_hex(std::string_view data);

// %.17g, so values round-trip exactly.
std::string format_double(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
    void add_row(const std::vector<double>& values);
    void add_row(const std::vector<std::string>& cells);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

void write_file(const std::filesystem::path& path, const std::string& content);

struct RunOptions {
    std::filesystem::path out_root;
    bool override_validation = false;
    int max_parallel = 1;
    bool seedless = false;  // every run is deterministic; accepted for compatibility
};

// Output root: --out, then QPHASE_OUT_DIR, then ./qphase_out.
std::filesystem::path resolve_out_root(const std::string& cli_out);

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_numeric = 3, exit_consistency = 4 };

int exit_code_for(const std::exception& e);

scatter::ScatteringModel scatter_model(const Config& cfg, bool override_validation);
dipole::DipoleModel dipole_model(const Config& cfg);

const std::map<std::string, std::set<std::string>>& scatter_schema();
const std::map<std::string, std::set<std::string>>& dipole_schema();

struct RunOutcome {
    int exit_code = exit_ok;
    std::string run_id;
    std::filesystem::path dir;
    std::string message;
    std::map<std::string, double> scalars;  // summary values for sweep indexes
};

// Both write <out_root>/<run_id>/ with CSV, summary.json and manifest.json.
RunOutcome run_scatter(const Config& cfg, const RunOptions& opt);
RunOutcome run_dipole(const Config& cfg, const RunOptions& opt);

int cmd_scatter(const std::filesystem::path& config, const RunOptions& opt);
int cmd_dipole(const std::filesystem::path& config, const RunOptions& opt);
int cmd_sweep(const std::filesystem::path& spec, const RunOptions& opt);
int cmd_converge(const std::filesystem::path& config, const RunOptions& opt, std::ostream& os);
int cmd_oracle(const std::string& formula, const std::map<std::string, std::string>& params,
               std::ostream& os);

std::vector<std::string> oracle_formulas();

struct SweepCell {
    std::vector<std::pair<std::string, std::string>> assignments;  // "section.key" -> value
    Config config;
};

// Cartesian product of the [sweep] axes applied to the base config, in row-major order.
std::vector<SweepCell> expand_sweep(const Config& spec, bool override_validation);

} // namespace qphase::harness
