#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "frag/config.hpp"
#include "frag/experiments.hpp"

using namespace frag;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("fragsim_test_" + tag);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json phi_config(const fs::path& out) {
    return json{{"kind", "phi"},
                {"measure", "mixture"},
                {"grids", {{"p", {0.0, 0.5, 1.0}}}},
                {"output_dir", out.string()}};
}

}  // namespace

TEST_CASE("measure registry and inline atoms") {
    CHECK(make_measure("binary").conservative());
    CHECK(!make_measure("dissipative").conservative());
    CHECK_THROWS_AS(make_measure("unknown"), ConfigError);

    json inline_measure = {{"atoms", {{{"weight", 2.0}, {"ratios", {0.5, 0.3}}}}}};
    DislocationMeasure nu = parse_measure(inline_measure);
    CHECK(nu.total_rate() == 2.0);
    CHECK(nu.atoms()[0].ratios[0] == 0.5);
    CHECK_THROWS_AS(parse_measure(json{{"atoms", json::array()}}), ConfigError);
}

TEST_CASE("test function and characteristic registries") {
    CHECK(make_test_function("one")(0.3) == 1.0);
    CHECK(make_test_function("constant:2.5")(0.9) == 2.5);
    CHECK(make_test_function("indicator:0.2,0.4")(0.3) == 1.0);
    CHECK(make_test_function("indicator:0.2,0.4")(0.5) == 0.0);
    CHECK(make_test_function("power:2")(0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(make_test_function("bogus"), ConfigError);

    CHECK(parse_characteristic_spec("zero").kind == CharacteristicSpec::Kind::Zero);
    CHECK(parse_characteristic_spec("count").kind == CharacteristicSpec::Kind::Count);
    CharacteristicSpec adapter = parse_characteristic_spec("adapter:power:1");
    CHECK(adapter.kind == CharacteristicSpec::Kind::Adapter);
    CHECK(adapter.f_spec == "power:1");
    CharacteristicSpec energy = parse_characteristic_spec("energy:-0.5,one");
    CHECK(energy.kind == CharacteristicSpec::Kind::Energy);
    CHECK(energy.p == -0.5);
    CHECK_THROWS_AS(parse_characteristic_spec("energy:nope"), ConfigError);
    CHECK_THROWS_AS(make_characteristic(energy, 0.0), ConfigError);
}

TEST_CASE("parse_config validates and reports the failing path") {
    json good = phi_config("out");
    ExperimentConfig cfg = parse_config(good);
    CHECK(cfg.kind == "phi");
    CHECK(cfg.p_grid.size() == 3);

    json bad_kind = good;
    bad_kind["kind"] = "nonsense";
    CHECK_THROWS_AS(parse_config(bad_kind), ConfigError);

    json bad_floor = good;
    bad_floor["sim"] = {{"size_floor", 0.0}};
    CHECK_THROWS_AS(parse_config(bad_floor), ConfigError);

    json bad_eta = {{"kind", "stopline"}, {"measure", "binary"}, {"grids", {{"eta", {0.0}}}}};
    CHECK_THROWS_AS(parse_config(bad_eta), ConfigError);

    json needs_mark = {{"kind", "immigration"},
                       {"measure", "binary"},
                       {"grids", {{"eta", {0.1}}}},
                       {"schedule", {{"u", {1.0}}, {"rate", 1.0}, {"theta", 0.5}, {"horizon", 2.0}}}};
    CHECK_THROWS_AS(parse_config(needs_mark), ConfigError);

    try {
        parse_config(bad_kind);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("kind") != std::string::npos);
    }
}

TEST_CASE("config schema text is non-empty and mentions every kind") {
    std::string schema = config_schema();
    for (const char* kind :
         {"phi", "simulate", "stopline", "characteristic", "immigration", "decay", "spine",
          "verify"})
        CHECK(schema.find(kind) != std::string::npos);
}

TEST_CASE("run_experiment writes artifacts and reruns byte-identically") {
    fs::path out = temp_dir("phi");
    json cfg_json = phi_config(out);
    ExperimentConfig cfg = parse_config(cfg_json);
    CHECK(run_experiment(cfg, cfg_json) == 0);
    REQUIRE(fs::exists(out / "summary.csv"));
    REQUIRE(fs::exists(out / "manifest.json"));
    std::string first_summary = slurp(out / "summary.csv");
    std::string first_manifest = slurp(out / "manifest.json");
    CHECK(first_summary.rfind("statistic,grid,mean,stderr,ci_lo,ci_hi,n\n", 0) == 0);
    CHECK(json::parse(first_manifest)["kind"] == "phi");

    CHECK(run_experiment(cfg, cfg_json) == 0);
    CHECK(slurp(out / "summary.csv") == first_summary);
    CHECK(slurp(out / "manifest.json") == first_manifest);
    fs::remove_all(out);
}

TEST_CASE("run_experiment rejects malformed experiments before writing") {
    fs::path out = temp_dir("reject");
    json cfg_json = {{"kind", "decay"},
                     {"measure", "mixture"},
                     // a single time point cannot define a slope
                     {"grids", {{"t", {1.0}}}},
                     {"output_dir", out.string()}};
    ExperimentConfig cfg = parse_config(cfg_json);
    CHECK_THROWS_AS(run_experiment(cfg, cfg_json), ConfigError);
    CHECK(!fs::exists(out));
}

TEST_CASE("fragsim binary: exit codes and artifacts") {
    const char* bin = std::getenv("FRAGSIM_BIN");
    if (!bin) return;  // only meaningful under ctest, which exports the path

    fs::path work = temp_dir("subprocess");
    fs::create_directories(work);
    fs::path bad_cfg = work / "bad.json";
    std::ofstream(bad_cfg) << "{\"kind\": \"nonsense\"}";
    std::string quiet = " > " + (work / "log.txt").string() + " 2>&1";
    int bad_rc = std::system((std::string(bin) + " run " + bad_cfg.string() + quiet).c_str());
    CHECK(WEXITSTATUS(bad_rc) == 2);

    fs::path good_cfg = work / "good.json";
    fs::path out = work / "out";
    std::ofstream(good_cfg) << phi_config(out).dump();
    int good_rc = std::system((std::string(bin) + " run " + good_cfg.string() + quiet).c_str());
    CHECK(WEXITSTATUS(good_rc) == 0);
    CHECK(fs::exists(out / "summary.csv"));

    int schema_rc = std::system((std::string(bin) + " schema" + quiet).c_str());
    CHECK(WEXITSTATUS(schema_rc) == 0);
    fs::remove_all(work);
}
