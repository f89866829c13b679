#include "internal.hpp"

#include "qphase/errors.hpp"
#include "qphase/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

namespace qphase::harness {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
        throw NumericError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(columns_.size()));
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ',';
        out += columns_[i];
    }
    out += '\n';
    for (const auto& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("write failed for " + path.string());
}

std::filesystem::path resolve_out_root(const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("QPHASE_OUT_DIR"); env && *env) return env;
    return "qphase_out";
}

int exit_code_for(const std::exception& e) {
    if (const auto* q = dynamic_cast<const Error*>(&e)) {
        switch (q->kind()) {
        case ErrorKind::config:
        case ErrorKind::domain: return exit_validation;
        case ErrorKind::numeric: return exit_numeric;
        case ErrorKind::consistency: return exit_consistency;
        }
    }
    return exit_numeric;
}

namespace detail {

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_json(const Config& cfg) {
    json j = json::object();
    for (const auto& [name, sec] : cfg.sections()) {
        json s = json::object();
        for (const auto& [k, v] : sec) s[k] = v;
        j[name] = s;
    }
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

void write_manifest(const std::filesystem::path& dir, const ManifestInfo& info) {
    json m;
    m["run_id"] = info.run_id;
    m["command"] = info.command;
    m["engine_version"] = QPHASE_VERSION;
    m["config_snapshot"] = info.config ? config_json(*info.config) : json::object();
    m["config_canonical"] = info.config ? info.config->canonical() : "";
    m["timestamps"] = {{"started", utc_timestamp(info.started)},
                       {"finished", utc_timestamp(info.finished)}};
    m["simd"] = kernels::name(kernels::active().isa);
    m["convergence_metadata"] = info.convergence;
    m["outputs"] = info.outputs;
    m["exit_code"] = info.exit_code;
    if (!info.message.empty()) m["message"] = info.message;
    write_file(dir / "manifest.json", dump(m));
}

std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& run_id) {
    const auto dir = root / run_id;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) std::filesystem::remove(entry.path());
    return dir;
}

} // namespace detail
} // namespace qphase::harness
