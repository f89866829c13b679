#include <doctest.h>

#include "qphase/errors.hpp"
#include "qphase/harness.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace qphase;
using namespace qphase::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qphase_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* small_scatter = R"(# desk scale
[scatter]
alpha_tilde = 200
L = 1
W = 10
p0 = pi/2
dt = 0.02
cells_per_L = 200
margin = 5
)";

const char* small_dipole = R"([dipole]
alpha = 1
beta = 1
charge = 4
z1 = 1
z2 = 2
samples = 201
[schedule]
g0 = 1
eps = 0.05
[uncertainty]
samples = 0
)";

} // namespace

TEST_SUITE("config") {
    TEST_CASE("parse, comments, CRLF") {
        const auto c = Config::parse("# top\r\n[a]\r\nx = 1.5 \r\n; note\r\ny=pi/2\r\n[b]\nlist = 1, 2,3\n");
        CHECK(c.get_double("a", "x", 0) == 1.5);
        CHECK(c.get_double("a", "y", 0) == doctest::Approx(pi / 2));
        CHECK(c.get_double("a", "z", 7) == 7.0);
        CHECK(c.get_list("b", "list") == std::vector<double>{1, 2, 3});
        CHECK(c.has("b"));
        CHECK(!c.has("c"));
    }
    TEST_CASE("errors carry the line") {
        try {
            Config::parse("[a]\nx=1\nx=2\n", "f.cfg");
            FAIL("duplicate accepted");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("f.cfg:3") != std::string::npos);
        }
        CHECK_THROWS_AS(Config::parse("x=1\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse("[a\nx=1\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse("[a b]\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse("[a]\nnovalue\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse("[a]\nx=abc\n").get_double("a", "x", 0), ConfigError);
        CHECK_THROWS_AS(Config::parse("[a]\nx=1.5\n").get_int("a", "x", 0), ConfigError);
        CHECK_THROWS_AS(Config::parse("[a]\nx=maybe\n").get_bool("a", "x", false), ConfigError);
    }
    TEST_CASE("numbers") {
        CHECK(parse_number("pi") == pi);
        CHECK(parse_number("2*pi") == 2 * pi);
        CHECK(parse_number("pi/4") == pi / 4);
        CHECK(parse_number("3*pi/2") == 3 * pi / 2);
        CHECK(parse_number("-1e-3") == -1e-3);
        CHECK_THROWS_AS(parse_number("pi/0"), ConfigError);
        CHECK_THROWS_AS(parse_number("1.2.3"), ConfigError);
    }
    TEST_CASE("canonical form and run_id ignore layout") {
        const auto a = Config::parse("[b]\ny=2\n[a]\nx = 1\n");
        const auto b = Config::parse("# c\n[a]\nx=1\n\n[b]\n  y = 2\n");
        CHECK(a.canonical() == "[a]\nx=1\n[b]\ny=2\n");
        CHECK(a.run_id() == b.run_id());
        CHECK(a.run_id().size() == 64);
        auto c = a;
        c.set("a", "x", "1.0");
        CHECK(c.run_id() != a.run_id());
    }
    TEST_CASE("sha256 known vector") {
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
    TEST_CASE("schema") {
        const auto c = Config::parse(std::string(small_scatter) + "bogus = 1\n");
        CHECK_THROWS_AS(c.check_schema(scatter_schema()), ConfigError);
        CHECK_NOTHROW(Config::parse(small_scatter).check_schema(scatter_schema()));
        CHECK_THROWS_AS(Config::parse("[nope]\na=1\n").check_schema(dipole_schema()), ConfigError);
    }
}

TEST_SUITE("csv") {
    TEST_CASE("17 digits, LF, round trip") {
        CsvTable t({"a", "b"});
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1e6, 1e6);
        std::vector<double> vals;
        for (int k = 0; k < 50; ++k) {
            const double a = u(rng), b = u(rng) * 1e-300;
            vals.push_back(a);
            vals.push_back(b);
            t.add_row({a, b});
        }
        const auto s = t.str();
        CHECK(s.find('\r') == std::string::npos);
        CHECK(s.back() == '\n');
        std::istringstream in(s);
        std::string line;
        std::getline(in, line);
        CHECK(line == "a,b");
        std::size_t i = 0;
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            CHECK(std::stod(line.substr(0, comma)) == vals[i++]);
            CHECK(std::stod(line.substr(comma + 1)) == vals[i++]);
        }
        CHECK(i == vals.size());
        CHECK(format_double(0.1) == "0.10000000000000001");
        CHECK(format_double(NAN) == "nan");
        CHECK_THROWS(t.add_row(std::vector<double>{1.0}));
    }
}

TEST_SUITE("exit codes") {
    TEST_CASE("mapping") {
        CHECK(exit_code_for(ConfigError("x")) == exit_validation);
        CHECK(exit_code_for(DomainError("x")) == exit_validation);
        CHECK(exit_code_for(InfeasibleError("x")) == exit_validation);
        CHECK(exit_code_for(NumericError("x")) == exit_numeric);
        CHECK(exit_code_for(BoundaryContamination("x", 0.1)) == exit_numeric);
        CHECK(exit_code_for(AdiabaticityError("x", 0.9)) == exit_consistency);
        CHECK(exit_code_for(std::runtime_error("x")) == exit_numeric);
    }
    TEST_CASE("output root resolution") {
        CHECK(resolve_out_root("here") == fs::path("here"));
        setenv("QPHASE_OUT_DIR", "/tmp/from_env", 1);
        CHECK(resolve_out_root("") == fs::path("/tmp/from_env"));
        unsetenv("QPHASE_OUT_DIR");
        CHECK(resolve_out_root("") == fs::path("qphase_out"));
    }
}

TEST_SUITE("runs") {
    TEST_CASE("scatter run is byte-identical across re-runs and manifests cover every file") {
        const auto cfg = Config::parse(small_scatter);
        RunOptions a, b;
        a.out_root = scratch_dir("det_a");
        b.out_root = scratch_dir("det_b");
        const auto ra = run_scatter(cfg, a);
        const auto rb = run_scatter(cfg, b);
        REQUIRE(ra.exit_code == exit_ok);
        REQUIRE(rb.exit_code == exit_ok);
        CHECK(ra.run_id == cfg.run_id());
        CHECK(ra.run_id == rb.run_id);
        const auto manifest = json::parse(slurp(ra.dir / "manifest.json"));
        std::set<std::string> listed;
        for (const auto& o : manifest["outputs"]) listed.insert(o.get<std::string>());
        std::set<std::string> present;
        for (const auto& e : fs::directory_iterator(ra.dir))
            if (e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
        CHECK(listed == present);
        for (const auto& f : listed) {
            CAPTURE(f);
            CHECK(slurp(ra.dir / f) == slurp(rb.dir / f));
        }
        CHECK(manifest["run_id"] == ra.run_id);
        CHECK(manifest["engine_version"] == "1.0.0");
        CHECK(manifest["exit_code"] == 0);
        CHECK(manifest["config_canonical"] == cfg.canonical());
        const auto summary = json::parse(slurp(ra.dir / "summary.json"));
        CHECK(summary.contains("final_phase"));
        CHECK(summary.contains("absorbed_probability"));
    }
    TEST_CASE("dipole run is byte-identical across re-runs") {
        const auto cfg = Config::parse(small_dipole);
        RunOptions a, b;
        a.out_root = scratch_dir("dip_a");
        b.out_root = scratch_dir("dip_b");
        const auto ra = run_dipole(cfg, a);
        const auto rb = run_dipole(cfg, b);
        REQUIRE(ra.exit_code == exit_ok);
        for (const char* f : {"dipole_timeseries.csv", "summary.json"})
            CHECK(slurp(ra.dir / f) == slurp(rb.dir / f));
        const auto summary = json::parse(slurp(ra.dir / "summary.json"));
        CHECK(summary.contains("phi_rel_final"));
        CHECK(summary.contains("phi0"));
        CHECK(summary.contains("gedanken"));
    }
    TEST_CASE("command exit codes") {
        const auto dir = scratch_dir("codes");
        RunOptions o;
        o.out_root = dir / "out";
        auto write = [&](const std::string& name, const std::string& text) {
            write_file(dir / name, text);
            return dir / name;
        };
        auto narrow = Config::parse(small_scatter);
        narrow.set("scatter", "W", "5");
        CHECK(cmd_scatter(write("narrow.cfg", narrow.canonical()), o) == exit_validation);
        CHECK(cmd_scatter(write("bad.cfg", "[scatter]\nfoo=1\n"), o) == exit_validation);
        CHECK(cmd_scatter(dir / "missing.cfg", o) == exit_validation);

        auto short_run = Config::parse(small_scatter);
        short_run.set("scatter", "t_final", "60");
        const auto r = run_scatter(short_run, o);
        CHECK(r.exit_code == exit_numeric);
        CHECK(fs::exists(r.dir / "manifest.json"));
        CHECK(json::parse(slurp(r.dir / "manifest.json"))["exit_code"] == exit_numeric);

        auto fast = Config::parse(small_dipole);
        fast.set("schedule", "eps", "2");
        CHECK(cmd_dipole(write("fast.cfg", fast.canonical()), o) == exit_consistency);

        auto infeasible = Config::parse(small_dipole);
        infeasible.set("dipole", "alpha", "2");
        infeasible.set("second_dipole", "alpha", "1");
        infeasible.set("second_dipole", "beta", "1");
        CHECK(cmd_dipole(write("inf.cfg", infeasible.canonical()), o) == exit_validation);
    }
}

TEST_SUITE("sweep") {
    TEST_CASE("expansion order and size guard") {
        const auto spec = Config::parse(std::string(small_scatter) +
                                        "[sweep]\nscatter.alpha_tilde = 50, 100\nscatter.dt = 0.01,0.02,0.03\n");
        const auto cells = expand_sweep(spec, false);
        REQUIRE(cells.size() == 6);
        CHECK(cells[0].assignments[0].second == "50");
        CHECK(cells[0].assignments[1].second == "0.01");
        CHECK(cells[1].assignments[1].second == "0.02");
        CHECK(cells[3].assignments[0].second == "100");
        CHECK(cells[4].config.get_double("scatter", "dt", 0) == 0.02);
        CHECK(!cells[0].config.has("sweep"));

        const auto empty = expand_sweep(Config::parse(small_scatter), false);
        REQUIRE(empty.size() == 1);
        CHECK(empty[0].config.run_id() == Config::parse(small_scatter).run_id());

        std::string big = std::string(small_scatter) + "[sweep]\n";
        const std::string ten = "1,2,3,4,5,6,7,8,9,10";
        for (const char* k : {"a", "b", "c", "d", "e", "f"}) big += std::string("scatter.") + k + " = " + ten + "\n";
        CHECK_THROWS_AS(expand_sweep(Config::parse(big), false), ConfigError);
        CHECK_THROWS_AS(expand_sweep(Config::parse("[sweep]\nnodot = 1\n"), false), ConfigError);
    }
    TEST_CASE("failing cell is recorded and the sweep succeeds") {
        const auto dir = scratch_dir("sweep");
        const auto spec = dir / "s.cfg";
        write_file(spec, std::string(small_scatter) + "[sweep]\nscatter.W = 10, 5\n");
        RunOptions o;
        o.out_root = dir / "out";
        o.max_parallel = 2;
        CHECK(cmd_sweep(spec, o) == exit_ok);
        fs::path index;
        for (const auto& e : fs::directory_iterator(o.out_root))
            if (e.path().filename().string().rfind("sweep-", 0) == 0) index = e.path() / "index.csv";
        REQUIRE(fs::exists(index));
        const auto text = slurp(index);
        std::istringstream in(text);
        std::string header, row0, row1;
        std::getline(in, header);
        std::getline(in, row0);
        std::getline(in, row1);
        CHECK(header.rfind("cell,run_id,status,exit_code,scatter.W,final_phase", 0) == 0);
        CHECK(row0.find(",ok,0,10,") != std::string::npos);
        CHECK(row1.find(",failed,2,5,") != std::string::npos);
    }
}

TEST_SUITE("oracle command") {
    TEST_CASE("values and errors") {
        std::ostringstream os;
        CHECK(cmd_oracle("bo-phase", {{"alpha", "1"}, {"gf", "1"}, {"T", "10"}}, os) == exit_ok);
        const auto j = json::parse(os.str());
        CHECK(j["value"].get<double>() == doctest::Approx(4.1421356237));
        CHECK(j["formula"] == "bo-phase");
        std::ostringstream r;
        CHECK(cmd_oracle("ramp-overlap", {{"W", "50"}, {"p0", "pi/2"}, {"L", "1"}, {"t", "0"}}, r) == exit_ok);
        const auto v = json::parse(r.str())["value"];
        CHECK(v[0].get<double>() == 1.0);
        CHECK(v[1].get<double>() == 0.0);
        std::ostringstream sink;
        CHECK(cmd_oracle("no-such", {}, sink) == exit_validation);
        CHECK(cmd_oracle("bo-phase", {{"alpha", "1"}}, sink) == exit_validation);
        CHECK(cmd_oracle("bo-phase", {{"alpha", "1"}, {"gf", "1"}, {"T", "1"}, {"x", "1"}}, sink) ==
              exit_validation);
        CHECK(oracle_formulas().size() >= 12);
    }
}

TEST_SUITE("converge") {
    TEST_CASE("coarse ladder fails with exit 4") {
        const auto dir = scratch_dir("conv");
        auto cfg = Config::parse(small_scatter);
        cfg.set("scatter", "dt", "0.8");
        write_file(dir / "c.cfg", cfg.canonical());
        RunOptions o;
        o.out_root = dir / "out";
        o.override_validation = true;
        std::ostringstream os;
        CHECK(cmd_converge(dir / "c.cfg", o, os) == exit_consistency);
        CHECK(os.str().find("FAIL") != std::string::npos);
    }
}
