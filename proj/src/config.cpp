#include "frag/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace frag {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

std::vector<double> get_number_list(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) fail(where, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) fail(where, "trailing characters in number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        fail(where, "not a number: '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

DislocationMeasure make_measure(const std::string& name) {
    if (name == "binary") return DislocationMeasure({{1.0, RankedMassVector({0.5, 0.5})}});
    if (name == "dissipative") return DislocationMeasure({{1.0, RankedMassVector({0.5, 0.25})}});
    if (name == "mixture")
        return DislocationMeasure({{0.5, RankedMassVector({0.5, 0.5})},
                                   {0.5, RankedMassVector({2.0 / 3.0, 1.0 / 3.0})}});
    fail("measure", "unknown measure name '" + name +
                        "' (registry: binary, dissipative, mixture)");
}

DislocationMeasure parse_measure(const nlohmann::json& j) {
    if (j.is_string()) return make_measure(j.get<std::string>());
    if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array() || j["atoms"].empty())
        fail("measure", "expected a registry name or {\"atoms\": [...]}");
    std::vector<DislocationAtom> atoms;
    for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
        const auto& a = j["atoms"][i];
        std::string where = "measure.atoms[" + std::to_string(i) + "]";
        if (!a.is_object() || !a.contains("weight") || !a.contains("ratios"))
            fail(where, "expected {\"weight\": w, \"ratios\": [...]}");
        try {
            atoms.push_back({get_number(a["weight"], where + ".weight"),
                             RankedMassVector(get_number_list(a["ratios"], where + ".ratios"))});
        } catch (const std::invalid_argument& e) {
            fail(where, e.what());
        }
    }
    try {
        return DislocationMeasure(std::move(atoms));
    } catch (const std::invalid_argument& e) {
        fail("measure", e.what());
    }
}

TestFunction make_test_function(const std::string& spec) {
    if (spec == "one") return TestFunction::constant(1.0);
    auto parts = split(spec, ':');
    const std::string& head = parts[0];
    std::string args = parts.size() > 1 ? parts[1] : "";
    if (head == "constant" && parts.size() == 2)
        return TestFunction::constant(parse_double(args, "f"));
    if (head == "indicator" && parts.size() == 2) {
        auto ab = split(args, ',');
        if (ab.size() == 2)
            return TestFunction::indicator(parse_double(ab[0], "f"), parse_double(ab[1], "f"));
    }
    if (head == "power" && parts.size() == 2) return TestFunction::power(parse_double(args, "f"));
    fail("f", "unknown test function '" + spec +
                  "' (registry: one, constant:c, indicator:a,b, power:q)");
}

CharacteristicSpec parse_characteristic_spec(const std::string& spec) {
    CharacteristicSpec out;
    if (spec == "zero") {
        out.kind = CharacteristicSpec::Kind::Zero;
        return out;
    }
    if (spec == "count") {
        out.kind = CharacteristicSpec::Kind::Count;
        return out;
    }
    if (spec.rfind("adapter:", 0) == 0) {
        out.kind = CharacteristicSpec::Kind::Adapter;
        out.f_spec = spec.substr(8);
        make_test_function(out.f_spec);  // validate eagerly
        return out;
    }
    if (spec.rfind("energy:", 0) == 0) {
        out.kind = CharacteristicSpec::Kind::Energy;
        auto args = split(spec.substr(7), ',');
        out.p = parse_double(args[0], "characteristic");
        if (args.size() > 1) out.psi_name = args[1];
        if (args.size() > 2 || (out.psi_name != "one" && out.psi_name != "zero"))
            fail("characteristic", "energy spec is energy:<p>[,one|zero]");
        return out;
    }
    fail("characteristic", "unknown characteristic '" + spec +
                               "' (registry: zero, count, adapter:<f>, energy:<p>,<psi>)");
}

Characteristic make_characteristic(const CharacteristicSpec& spec, double p_star) {
    switch (spec.kind) {
        case CharacteristicSpec::Kind::Zero:
            return zero_characteristic();
        case CharacteristicSpec::Kind::Count:
            return counting_characteristic();
        case CharacteristicSpec::Kind::Adapter:
            return empirical_adapter(make_test_function(spec.f_spec), p_star);
        case CharacteristicSpec::Kind::Energy:
            fail("characteristic", "energy specs drive energy(), not a characteristic");
    }
    fail("characteristic", "unreachable");
}

EnergySpec make_energy_spec(const CharacteristicSpec& spec) {
    if (spec.kind != CharacteristicSpec::Kind::Energy)
        fail("characteristic", "not an energy spec");
    EnergySpec out;
    out.p = spec.p;
    out.psi_name = spec.psi_name;
    if (spec.psi_name == "one")
        out.psi = [](const RankedMassVector&) { return 1.0; };
    else
        out.psi = [](const RankedMassVector&) { return 0.0; };
    return out;
}

ImmigrationSchedule parse_schedule(const nlohmann::json& j) {
    if (!j.is_object()) fail("schedule", "expected an object");
    ImmigrationSchedule s;
    try {
        if (j.contains("u")) s.initial_config = RankedMassVector(get_number_list(j["u"], "schedule.u"));
        if (j.contains("rate")) s.rate = get_number(j["rate"], "schedule.rate");
        if (j.contains("theta")) s.size_decay_theta = get_number(j["theta"], "schedule.theta");
        if (j.contains("horizon")) s.horizon = get_number(j["horizon"], "schedule.horizon");
        if (j.contains("mark")) {
            const auto& m = j["mark"];
            if (m.is_array()) {
                s.mark = MarkSampler::fixed(RankedMassVector(get_number_list(m, "schedule.mark")));
            } else if (m.is_object() && m.contains("choices") && m["choices"].is_array()) {
                for (std::size_t i = 0; i < m["choices"].size(); ++i) {
                    const auto& c = m["choices"][i];
                    std::string where = "schedule.mark.choices[" + std::to_string(i) + "]";
                    if (!c.is_object() || !c.contains("weight") || !c.contains("ratios"))
                        fail(where, "expected {\"weight\": w, \"ratios\": [...]}");
                    s.mark.choices.emplace_back(
                        get_number(c["weight"], where + ".weight"),
                        RankedMassVector(get_number_list(c["ratios"], where + ".ratios")));
                }
            } else {
                fail("schedule.mark", "expected [ratios...] or {\"choices\": [...]}");
            }
        }
    } catch (const std::invalid_argument& e) {
        fail("schedule", e.what());
    }
    if (s.rate < 0.0) fail("schedule.rate", "must be >= 0");
    if (s.size_decay_theta < 0.0) fail("schedule.theta", "must be >= 0");
    if (s.horizon < 0.0) fail("schedule.horizon", "must be >= 0");
    if (s.rate > 0.0 && s.mark.choices.empty())
        fail("schedule.mark", "required when rate > 0");
    return s;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) fail("$", "top level must be an object");
    ExperimentConfig cfg;

    if (!j.contains("kind") || !j["kind"].is_string()) fail("kind", "required string");
    cfg.kind = j["kind"].get<std::string>();
    static const char* kinds[] = {"phi",         "simulate", "stopline", "characteristic",
                                  "immigration", "decay",    "spine",    "verify"};
    if (std::find_if(std::begin(kinds), std::end(kinds),
                     [&](const char* k) { return cfg.kind == k; }) == std::end(kinds))
        fail("kind", "unknown kind '" + cfg.kind + "'");

    if (j.contains("measure")) cfg.measure = parse_measure(j["measure"]);

    if (j.contains("sim")) {
        const auto& s = j["sim"];
        if (!s.is_object()) fail("sim", "expected an object");
        if (s.contains("alpha")) cfg.sim.alpha = get_number(s["alpha"], "sim.alpha");
        if (s.contains("horizon")) cfg.sim.horizon = get_number(s["horizon"], "sim.horizon");
        if (s.contains("size_floor"))
            cfg.sim.size_floor = get_number(s["size_floor"], "sim.size_floor");
        if (s.contains("seed")) cfg.sim.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("max_events"))
            cfg.sim.max_events = static_cast<std::int64_t>(get_number(s["max_events"], "sim.max_events"));
        if (!(cfg.sim.size_floor > 0.0 && cfg.sim.size_floor < 1.0))
            fail("sim.size_floor", "must lie in (0,1)");
        if (cfg.sim.horizon < 0.0) fail("sim.horizon", "must be >= 0");
    }

    if (j.contains("schedule")) cfg.schedule = parse_schedule(j["schedule"]);

    if (j.contains("grids")) {
        const auto& g = j["grids"];
        if (!g.is_object()) fail("grids", "expected an object");
        if (g.contains("eta")) cfg.eta_grid = get_number_list(g["eta"], "grids.eta");
        if (g.contains("t")) cfg.t_grid = get_number_list(g["t"], "grids.t");
        if (g.contains("p")) cfg.p_grid = get_number_list(g["p"], "grids.p");
        if (g.contains("q")) cfg.q_grid = get_number_list(g["q"], "grids.q");
        for (double eta : cfg.eta_grid)
            if (!(eta > 0.0 && eta <= 1.0)) fail("grids.eta", "entries must lie in (0,1]");
    }

    if (j.contains("mc")) {
        const auto& m = j["mc"];
        if (!m.is_object()) fail("mc", "expected an object");
        if (m.contains("n_paths"))
            cfg.mc.n_paths = static_cast<std::int64_t>(get_number(m["n_paths"], "mc.n_paths"));
        if (m.contains("base_seed")) cfg.mc.base_seed = m["base_seed"].get<std::uint64_t>();
        if (m.contains("batch"))
            cfg.mc.batch = static_cast<std::int64_t>(get_number(m["batch"], "mc.batch"));
        if (m.contains("ci_level")) cfg.mc.ci_level = get_number(m["ci_level"], "mc.ci_level");
        if (m.contains("workers"))
            cfg.mc.workers = static_cast<int>(get_number(m["workers"], "mc.workers"));
        if (cfg.mc.n_paths < 1) fail("mc.n_paths", "must be >= 1");
        if (!(cfg.mc.ci_level > 0.0 && cfg.mc.ci_level < 1.0))
            fail("mc.ci_level", "must lie in (0,1)");
    }

    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) fail("output_dir", "expected a string");
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("f")) {
        if (!j["f"].is_string()) fail("f", "expected a string");
        cfg.f_spec = j["f"].get<std::string>();
        make_test_function(cfg.f_spec);  // validate
    }
    if (j.contains("characteristic")) {
        if (!j["characteristic"].is_string()) fail("characteristic", "expected a string");
        cfg.characteristic_spec = j["characteristic"].get<std::string>();
        parse_characteristic_spec(cfg.characteristic_spec);  // validate
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
    return parse_config(j);
}

std::string config_schema() {
    return R"(fragsim experiment config (JSON object)

{
  "kind": "phi | simulate | stopline | characteristic | immigration | decay | spine | verify",
  "measure": "binary | dissipative | mixture"
           | {"atoms": [{"weight": w > 0, "ratios": [r1, r2, ...]}, ...]},
  "sim": {
    "alpha": 0.0,          // self-similarity index
    "horizon": 10.0,       // process time limit (>= 0)
    "size_floor": 1e-9,    // relative freezing threshold, in (0,1)
    "seed": 0,             // base seed for single-path outputs
    "max_events": 10000000
  },
  "schedule": {             // optional; required by kind = immigration
    "u": [1.0],             // configuration present at time 0
    "rate": 0.5,            // Poisson intensity of arrivals (>= 0)
    "theta": 0.5,           // arrival at r is scaled by exp(-theta*r)
    "horizon": 10.0,        // arrivals land on [0, horizon]
    "mark": [1.0]           // fixed mark, or {"choices": [{"weight", "ratios"}]}
  },
  "grids": {                // each optional; kinds read the ones they need
    "eta": [0.1, 0.01],     // entries in (0,1]
    "t":   [1, 2, 4],
    "p":   [0.0, 0.5],
    "q":   [1.0]
  },
  "mc": {
    "n_paths": 1000,
    "base_seed": 1,         // path i uses seed base_seed XOR i
    "batch": 1024,
    "ci_level": 0.99,
    "workers": 0            // 0: FRAGSIM_WORKERS env var, else hardware threads
  },
  "output_dir": "out",
  "f": "one | constant:c | indicator:a,b | power:q",
  "characteristic": "zero | count | adapter:<f> | energy:<p>,<one|zero>"
}

Outputs land in output_dir: summary.csv always; events.csv (simulate),
stopped.csv (stopline), trajectories.csv (decay), spine.csv (spine),
verdict.csv (verify); manifest.json records the config, seeds and worker
count for exact reproduction. Exit codes: 0 success, 1 failed verification
criteria, 2 malformed config.
)";
}

}  // namespace frag
