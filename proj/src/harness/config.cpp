#include "qphase/harness.hpp"

#include "qphase/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qphase::harness {
namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

bool valid_name(const std::string& s, bool allow_dot) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [&](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || (allow_dot && c == '.');
    });
}

double plain_number(const std::string& s, const std::string& full) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v))
        throw ConfigError("not a number: '" + full + "'");
    return v;
}

std::string where(const std::string& section, const std::string& key) {
    return "[" + section + "] " + key;
}

} // namespace

double parse_number(const std::string& text) {
    const std::string s = trim(text);
    const auto at = s.find("pi");
    if (at == std::string::npos) return plain_number(s, text);
    double factor = 1.0, divisor = 1.0;
    const std::string head = trim(s.substr(0, at));
    const std::string tail = trim(s.substr(at + 2));
    if (!head.empty()) {
        if (head.back() != '*') throw ConfigError("not a number: '" + text + "'");
        factor = plain_number(trim(head.substr(0, head.size() - 1)), text);
    }
    if (!tail.empty()) {
        if (tail.front() != '/') throw ConfigError("not a number: '" + text + "'");
        divisor = plain_number(trim(tail.substr(1)), text);
        if (divisor == 0.0) throw ConfigError("division by zero in '" + text + "'");
    }
    return factor * pi / divisor;
}

Config Config::parse(std::string_view text, const std::string& origin) {
    Config c;
    std::string section;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string loc = origin + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(loc + "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!valid_name(section, false)) throw ConfigError(loc + "bad section name '" + section + "'");
            c.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(loc + "expected key = value");
        if (section.empty()) throw ConfigError(loc + "key outside any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!valid_name(key, true)) throw ConfigError(loc + "bad key '" + key + "'");
        auto& sec = c.sections_[section];
        if (sec.count(key)) throw ConfigError(loc + "duplicate key " + where(section, key));
        sec[key] = value;
        if (nl == text.size()) break;
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

bool Config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const std::string* Config::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

void Config::erase(const std::string& section) { sections_.erase(section); }

double Config::get_double(const std::string& section, const std::string& key, double def) const {
    const auto* v = find(section, key);
    if (!v) return def;
    try {
        return parse_number(*v);
    } catch (const ConfigError& e) {
        throw ConfigError(where(section, key) + ": " + e.what());
    }
}

int Config::get_int(const std::string& section, const std::string& key, int def) const {
    const auto* v = find(section, key);
    if (!v) return def;
    int out = 0;
    const char* end = v->data() + v->size();
    auto [p, ec] = std::from_chars(v->data(), end, out);
    if (ec != std::errc() || p != end)
        throw ConfigError(where(section, key) + ": not an integer: '" + *v + "'");
    return out;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool def) const {
    const auto* v = find(section, key);
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(where(section, key) + ": expected true or false, got '" + *v + "'");
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& def) const {
    const auto* v = find(section, key);
    return v ? *v : def;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const auto* v = find(section, key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(parse_number(item));
        } catch (const ConfigError& e) {
            throw ConfigError(where(section, key) + ": " + e.what());
        }
    }
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [name, sec] : sections_) {
        out += "[" + name + "]\n";
        for (const auto& [k, v] : sec) out += k + "=" + v + "\n";
    }
    return out;
}

std::string Config::run_id() const { return sha256_hex(canonical()); }

void Config::check_schema(const std::map<std::string, std::set<std::string>>& schema) const {
    for (const auto& [name, sec] : sections_) {
        auto s = schema.find(name);
        if (s == schema.end()) throw ConfigError("unknown section [" + name + "]");
        for (const auto& kv : sec)
            if (!s->second.count(kv.first)) throw ConfigError("unknown key " + where(name, kv.first));
    }
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& scatter_schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"run", {"name"}},
        {"scatter",
         {"alpha_tilde", "L", "W", "p0", "mass", "delta_width", "packet_shape", "flat_top_order",
          "margin", "dt", "cells_per_L", "mask_fraction", "mask_strength", "wall_height_factor",
          "wall_cells", "barrier_L1", "t_final", "sample_every"}},
        {"probe", {"epsilon", "position", "branch"}},
        {"path_integral", {"positions", "n"}},
        {"converge", {"levels", "tolerance"}},
        {"output", {"gnuplot"}},
    };
    return s;
}

const std::map<std::string, std::set<std::string>>& dipole_schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"run", {"name"}},
        {"dipole",
         {"alpha", "beta", "coupling", "charge", "table_z", "table_f", "z1", "z2", "cage_radius",
          "tol", "samples"}},
        {"schedule", {"g0", "eps", "t1", "t2", "cutoff"}},
        {"second_dipole", {"alpha", "beta", "initial"}},
        {"uncertainty", {"samples", "times"}},
        {"converge", {"tols"}},
        {"output", {"gnuplot"}},
    };
    return s;
}

scatter::ScatteringModel scatter_model(const Config& cfg, bool override_validation) {
    using scatter::ScatteringModel;
    ScatteringModel m;
    const std::string s = "scatter";
    m.alpha_tilde = cfg.get_double(s, "alpha_tilde", m.alpha_tilde);
    m.L = cfg.get_double(s, "L", m.L);
    m.W = cfg.get_double(s, "W", m.W);
    m.p0 = cfg.get_double(s, "p0", m.p0);
    m.mass = cfg.get_double(s, "mass", m.mass);
    m.delta_width = cfg.get_double(s, "delta_width", m.delta_width);
    const std::string shape = cfg.get_string(s, "packet_shape", "flat_top");
    if (shape == "flat_top") m.packet_shape = scatter::PacketShape::flat_top;
    else if (shape == "gaussian") m.packet_shape = scatter::PacketShape::gaussian;
    else throw ConfigError("[scatter] packet_shape must be flat_top or gaussian");
    m.flat_top_order = cfg.get_int(s, "flat_top_order", m.flat_top_order);
    m.margin = cfg.get_double(s, "margin", m.margin);
    m.dt = cfg.get_double(s, "dt", m.dt);
    m.mask_fraction = cfg.get_double(s, "mask_fraction", m.mask_fraction);
    m.mask_strength = cfg.get_double(s, "mask_strength", m.mask_strength);
    m.wall_height_factor = cfg.get_double(s, "wall_height_factor", m.wall_height_factor);
    m.wall_cells = cfg.get_int(s, "wall_cells", m.wall_cells);
    if (cfg.has(s, "barrier_L1")) m.barrier_L1 = cfg.get_double(s, "barrier_L1", 0.0);
    m.relax_validation = override_validation;
    m.grid = scatter::default_grid(m.L, m.W, cfg.get_int(s, "cells_per_L", 400), m.margin);
    return m;
}

dipole::DipoleModel dipole_model(const Config& cfg) {
    dipole::DipoleModel m;
    const std::string d = "dipole";
    m.alpha = cfg.get_double(d, "alpha", m.alpha);
    m.beta = cfg.get_double(d, "beta", m.beta);
    m.charge = cfg.get_double(d, "charge", m.charge);
    m.z1 = cfg.get_double(d, "z1", m.z1);
    m.z2 = cfg.get_double(d, "z2", m.z2);
    m.cage_radius = cfg.get_double(d, "cage_radius", m.cage_radius);
    m.tol = cfg.get_double(d, "tol", m.tol);
    const std::string kind = cfg.get_string(d, "coupling", "power_law");
    if (kind == "tabulated") {
        m.set_table(cfg.get_list(d, "table_z"), cfg.get_list(d, "table_f"));
    } else if (kind != "power_law") {
        throw ConfigError("[dipole] coupling must be power_law or tabulated");
    } else if (cfg.has(d, "table_z") || cfg.has(d, "table_f")) {
        throw ConfigError("[dipole] table_z/table_f need coupling = tabulated");
    }
    const std::string sc = "schedule";
    const auto def = m.schedule;
    m.schedule = SwitchingSchedule::make(cfg.get_double(sc, "g0", def.g0), cfg.get_double(sc, "eps", def.eps),
                                         cfg.get_double(sc, "t1", def.t1), cfg.get_double(sc, "t2", def.t2));
    m.schedule.cutoff = cfg.get_double(sc, "cutoff", def.cutoff);
    if (!(m.schedule.cutoff > 0.0 && m.schedule.cutoff < 1.0))
        throw ConfigError("[schedule] cutoff must lie in (0, 1)");
    if (cfg.has("second_dipole")) {
        dipole::SecondDipole s2;
        s2.alpha = cfg.get_double("second_dipole", "alpha", s2.alpha);
        s2.beta = cfg.get_double("second_dipole", "beta", s2.beta);
        const std::string init = cfg.get_string("second_dipole", "initial", "excited");
        if (init == "excited") s2.initial = dipole::DipoleState::excited;
        else if (init == "ground") s2.initial = dipole::DipoleState::ground;
        else throw ConfigError("[second_dipole] initial must be excited or ground");
        m.second = s2;
    }
    return m;
}

} // namespace qphase::harness
