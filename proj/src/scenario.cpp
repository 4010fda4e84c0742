#include "popdyn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "popdyn/csv.hpp"
#include "popdyn/errors.hpp"
#include "popdyn/stability.hpp"

namespace popdyn {

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be rejected as unknown.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& at(const std::string& key) {
        if (!obj_.contains(key)) throw ConfigError(key_path(key), "missing required key");
        seen_.insert(key);
        return obj_.at(key);
    }

    double number(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
        return v.get<double>();
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    int integer(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
        return v.get<int>();
    }

    int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
        return v.get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    ObjectReader object(const std::string& key) { return ObjectReader(at(key), key_path(key)); }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) throw ConfigError(key_path(key), "unknown key");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

// Runs a constructor/validator, turning ArgumentError into ValidationError
// tagged with the config location.
template <typename F>
auto validated(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ArgumentError& e) {
        throw ValidationError(where + ": " + e.what());
    } catch (const PreconditionError& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

struct ParsedModel {
    std::string type;
    std::variant<SingleParams, PairParams, GeneralMapParams, PolyMapParams> params;
};

ParsedModel parse_model(ObjectReader r) {
    const std::string type = r.string("type");
    const std::string where = r.key_path("type");
    ParsedModel out{type, PolyMapParams(1.0)};
    if (type == "single") {
        const double rr = r.number("r"), k = r.number("k"), h = r.number("h", 0.0);
        out.params = validated(where, [&] { return SingleParams(rr, k, h); });
    } else if (type == "pair") {
        const double rr = r.number("r"), k = r.number("k"), a = r.number("a"), c = r.number("c"),
                     d = r.number("d");
        out.params = validated(where, [&] { return PairParams(rr, k, a, c, d); });
    } else if (type == "general") {
        const double rr = r.number("r"), k = r.number("k"), b = r.number("b"), m = r.number("m"),
                     n = r.number("n"), a = r.number("a"), c = r.number("c"), d = r.number("d");
        out.params = validated(where, [&] { return GeneralMapParams(rr, k, b, m, n, a, c, d); });
    } else if (type == "poly") {
        const double s = r.number("s");
        out.params = validated(where, [&] { return PolyMapParams(s); });
    } else {
        throw ConfigError(where, "unknown model type '" + type + "' (single, pair, general, poly)");
    }
    r.finish();
    return out;
}

State parse_state(ObjectReader r) {
    State s;
    s.x = r.number("x");
    s.y = r.number("y", 0.0);
    r.finish();
    return s;
}

Interval parse_interval(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError(where, "expected [lo, hi]");
    }
    Interval iv{v[0].get<double>(), v[1].get<double>()};
    if (!(iv.hi > iv.lo)) throw ValidationError(where + ": interval must satisfy lo < hi");
    return iv;
}

AdjointMode parse_adjoint_mode(const std::string& s, const std::string& where) {
    if (s == "consistent") return AdjointMode::Consistent;
    if (s == "paper-literal") return AdjointMode::PaperLiteral;
    throw ConfigError(where, "expected 'consistent' or 'paper-literal'");
}

ObjectiveRange parse_range(const std::string& s, const std::string& where) {
    if (s == "full-horizon") return ObjectiveRange::FullHorizon;
    if (s == "skip-initial") return ObjectiveRange::SkipInitial;
    if (s == "first-T-minus-1") return ObjectiveRange::FirstTMinus1;
    throw ConfigError(where, "expected 'full-horizon', 'skip-initial' or 'first-T-minus-1'");
}

SweepConfig parse_sweep(ObjectReader r) {
    SweepConfig cfg;
    cfg.relaxation = r.number("relaxation", cfg.relaxation);
    cfg.conv_tol = r.number("conv_tol", cfg.conv_tol);
    cfg.max_iters = r.integer("max_iters", cfg.max_iters);
    r.finish();
    validated(r.key_path("sweep"), [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

ControlProblem parse_problem(ObjectReader& r) {
    const ParsedModel pm = parse_model(r.object("model"));
    ControlProblem prob{SingleParams(1.0, 1.0), State{}};
    if (const auto* sp = std::get_if<SingleParams>(&pm.params)) {
        prob.model = *sp;
    } else if (const auto* pp = std::get_if<PairParams>(&pm.params)) {
        prob.model = *pp;
    } else {
        throw ConfigError(r.key_path("model.type"), "control problems take a 'single' or 'pair' model");
    }
    prob.initial = parse_state(r.object("initial"));
    prob.horizon = r.integer("horizon");
    prob.c1 = r.number("c1");
    prob.c2 = r.number("c2");
    prob.h_max = r.number("h_max", 0.9);
    prob.adjoint_mode = parse_adjoint_mode(r.string("adjoint_mode", "consistent"), r.key_path("adjoint_mode"));
    prob.range = parse_range(r.string("objective_range", "full-horizon"), r.key_path("objective_range"));
    validated(r.key_path("model"), [&] {
        prob.validate();
        return 0;
    });
    return prob;
}

DynamicalMap basin_map(const BasinModel& m) {
    return std::visit(
        [](const auto& p) -> DynamicalMap {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PolyMapParams>) {
                return as_map(p);
            } else {
                return as_map(Model(p));
            }
        },
        m);
}

Scenario parse_one(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    const std::string name = r.string("name");
    if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        })) {
        throw ConfigError(r.key_path("name"), "name must be non-empty and use only [A-Za-z0-9._-]");
    }
    const std::string kind = r.string("kind");

    if (kind == "simulate") {
        const ParsedModel pm = parse_model(r.object("model"));
        SimulateScenario s;
        s.name = name;
        if (const auto* p = std::get_if<SingleParams>(&pm.params)) s.model = *p;
        else if (const auto* p = std::get_if<PairParams>(&pm.params)) s.model = *p;
        else if (const auto* p = std::get_if<GeneralMapParams>(&pm.params)) s.model = *p;
        else throw ConfigError(r.key_path("model.type"), "simulate takes a single, pair or general model");
        s.initial = parse_state(r.object("initial"));
        s.horizon = r.integer("horizon");
        if (s.horizon < 1) throw ValidationError(r.key_path("horizon") + ": must be >= 1");
        if (!std::isfinite(s.initial.x) || s.initial.x < 0.0 || !std::isfinite(s.initial.y) || s.initial.y < 0.0) {
            throw ValidationError(r.key_path("initial") + ": densities must be finite and >= 0");
        }
        r.finish();
        return s;
    }
    if (kind == "equilibria") {
        const ParsedModel pm = parse_model(r.object("model"));
        EquilibriaScenario s;
        s.name = name;
        if (const auto* p = std::get_if<SingleParams>(&pm.params)) s.model = *p;
        else if (const auto* p = std::get_if<PairParams>(&pm.params)) s.model = *p;
        else throw ConfigError(r.key_path("model.type"), "equilibria takes a single or pair model");
        s.tolerance = r.number("tolerance", kDefaultNonHyperbolicTol);
        if (!(s.tolerance >= 0.0)) throw ValidationError(r.key_path("tolerance") + ": must be >= 0");
        r.finish();
        return s;
    }
    if (kind == "basin") {
        const ParsedModel pm = parse_model(r.object("model"));
        BasinScenario s;
        s.name = name;
        s.model = pm.params;
        s.target = parse_state(r.object("target"));
        ObjectReader box = r.object("box");
        s.config.box.x = parse_interval(box.at("x"), box.key_path("x"));
        if (box.has("y")) s.config.box.y = parse_interval(box.at("y"), box.key_path("y"));
        box.finish();
        s.config.grid = r.integer("grid", s.config.grid);
        s.config.burn_in = r.integer("burn_in", s.config.burn_in);
        s.config.conv_tol = r.number("conv_tol", s.config.conv_tol);
        s.config.escape_bound = r.number("escape_bound", s.config.escape_bound);
        s.config.interior_margin = r.number("interior_margin", s.config.interior_margin);
        s.fixed_point_seeds = r.integer("fixed_point_seeds", s.fixed_point_seeds);
        if (r.has("probes")) {
            const json& probes = r.at("probes");
            if (!probes.is_array()) throw ConfigError(r.key_path("probes"), "expected an array of [x] or [x, y]");
            for (const json& p : probes) {
                if (!p.is_array() || p.empty() || p.size() > 2 ||
                    !std::all_of(p.begin(), p.end(), [](const json& e) { return e.is_number(); })) {
                    throw ConfigError(r.key_path("probes"), "expected an array of [x] or [x, y]");
                }
                s.config.probes.push_back({p[0].get<double>(), p.size() == 2 ? p[1].get<double>() : 0.0});
            }
        }
        r.finish();
        const DynamicalMap map = basin_map(s.model);
        validated(r.key_path("box"), [&] {
            s.config.validate(map.dim);
            return 0;
        });
        const State image = map.step(s.target);
        const double res = std::max(std::abs(image.x - s.target.x), map.dim == 2 ? std::abs(image.y - s.target.y) : 0.0);
        if (!(res <= 1e-8)) throw ValidationError(r.key_path("target") + ": not a fixed point of the model (residual > 1e-8)");
        return s;
    }
    if (kind == "optimize") {
        OptimizeScenario s;
        s.name = name;
        s.problem = parse_problem(r);
        if (r.has("sweep")) s.sweep = parse_sweep(r.object("sweep"));
        r.finish();
        return s;
    }
    if (kind == "table1") {
        Table1Scenario s;
        s.name = name;
        const auto side = [&](const std::string& key, const char* expected_model) {
            ObjectReader sr = r.object(key);
            Table1Side out{parse_problem(sr), {}};
            if ((std::string(expected_model) == "pair") != out.problem.two_species()) {
                throw ConfigError(sr.key_path("model.type"), std::string("expected a '") + expected_model + "' model");
            }
            const json& hs = sr.at("constant_h");
            if (!hs.is_array()) throw ConfigError(sr.key_path("constant_h"), "expected an array of numbers");
            for (const json& h : hs) {
                if (!h.is_number()) throw ConfigError(sr.key_path("constant_h"), "expected an array of numbers");
                const double v = h.get<double>();
                if (!(v >= 0.0 && v <= out.problem.h_max)) {
                    throw ValidationError(sr.key_path("constant_h") + ": values must lie in [0, h_max]");
                }
                out.constant_h.push_back(v);
            }
            sr.finish();
            return out;
        };
        s.single = side("single", "single");
        s.pair = side("pair", "pair");
        if (r.has("sweep")) s.sweep = parse_sweep(r.object("sweep"));
        r.finish();
        return s;
    }
    throw ConfigError(r.key_path("kind"), "unknown kind '" + kind + "' (simulate, equilibria, basin, optimize, table1)");
}

std::string num(double v) { return csv::format(v, 6); }

std::string state_str(const State& s, bool two) {
    return two ? "(" + num(s.x) + ", " + num(s.y) + ")" : num(s.x);
}

json state_json(const State& s, bool two) {
    json j = {{"x", s.x}};
    if (two) j["y"] = s.y;
    return j;
}

struct Outcome {
    std::string summary;
    std::vector<std::string> outputs;
    json results;
};

Outcome run_simulate(const SimulateScenario& s, const std::filesystem::path& dir) {
    const Trajectory traj = simulate(s.model, s.initial, s.horizon);
    const bool two = is_two_species(s.model);
    const std::string file = s.name + ".csv";
    write_trajectory_csv(dir / file, traj, two);
    Outcome o;
    o.summary = "T=" + std::to_string(s.horizon) + " final=" + state_str(traj.states.back(), two) +
                (traj.clamped ? " clamped=yes" : " clamped=no");
    o.outputs = {file};
    o.results = {{"final", state_json(traj.states.back(), two)}, {"clamped", traj.clamped}};
    return o;
}

Outcome run_equilibria(const EquilibriaScenario& s, const std::filesystem::path& dir) {
    const auto reports = std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SingleParams>) {
                return equilibria_single(p, s.tolerance);
            } else {
                return equilibria_pair(p, s.tolerance);
            }
        },
        s.model);
    const std::string file = s.name + ".csv";
    write_equilibria_csv(dir / file, reports);
    Outcome o;
    json list = json::array();
    for (const auto& rep : reports) {
        if (!o.summary.empty()) o.summary += ", ";
        if (!rep.exists) {
            o.summary += rep.name + " absent";
        } else {
            o.summary += rep.name + " " + to_string(rep.class_theorem->tag) + "/" + to_string(rep.class_eigen->tag);
            if (!rep.agreement) o.summary += " DISAGREE";
        }
        json e = {{"name", rep.name}, {"exists", rep.exists}};
        if (rep.exists) {
            e["point"] = state_json(rep.point, true);
            e["theorem"] = to_string(rep.class_theorem->tag);
            e["theorem_detail"] = rep.class_theorem->detail;
            e["eigen"] = to_string(rep.class_eigen->tag);
            e["agreement"] = rep.agreement;
        }
        list.push_back(std::move(e));
    }
    o.outputs = {file};
    o.results = {{"equilibria", list}};
    return o;
}

Outcome run_basin(const BasinScenario& s, const std::filesystem::path& dir) {
    const DynamicalMap map = basin_map(s.model);
    const BasinReport rep = basin_scan(map, s.config, s.target);
    const auto fixed = find_fixed_points(map, s.config.box, s.fixed_point_seeds);
    const std::string file = s.name + ".csv";
    write_basin_csv(dir / file, rep, map.dim);
    const bool two = map.dim == 2;
    Outcome o;
    o.summary = std::string("verdict=") + to_string(rep.verdict) + " coverage=" + num(rep.interior_coverage) +
                " samples=" + std::to_string(rep.n_samples);
    if (rep.witness) {
        o.summary += " witness=" + state_str(rep.witness->x0, two) + " (" + to_string(rep.witness->outcome) + ")";
    }
    json fps = json::array();
    for (const State& fp : fixed) fps.push_back(state_json(fp, two));
    o.outputs = {file};
    o.results = {{"verdict", to_string(rep.verdict)},
                 {"interior_coverage", rep.interior_coverage},
                 {"interior_margin", rep.interior_margin},
                 {"n_samples", rep.n_samples},
                 {"n_converged", rep.n_converged},
                 {"n_other_attractor", rep.n_other_attractor},
                 {"n_escaped", rep.n_escaped},
                 {"n_interior", rep.n_interior},
                 {"gas_consistent", rep.gas_consistent},
                 {"fixed_points_in_box", fps}};
    if (rep.witness) {
        o.results["witness"] = {{"x0", state_json(rep.witness->x0, two)},
                                {"outcome", to_string(rep.witness->outcome)},
                                {"final", state_json(rep.witness->final_state, two)}};
    }
    return o;
}

json solution_json(const ControlSolution& sol) {
    return {{"objective", sol.objective}, {"iterations", sol.iterations}, {"converged", sol.converged}};
}

Outcome run_optimize(const OptimizeScenario& s, const std::filesystem::path& dir) {
    const ControlSolution sol = solve_fbs(s.problem, s.sweep);
    const std::string file = s.name + ".csv";
    write_solution_csv(dir / file, sol, s.problem.two_species());
    Outcome o;
    o.summary = "J=" + num(sol.objective) + " iterations=" + std::to_string(sol.iterations) +
                (sol.converged ? " converged=yes" : " converged=no") + " range=" + to_string(s.problem.range) +
                " adjoint=" + to_string(s.problem.adjoint_mode);
    o.outputs = {file};
    o.results = solution_json(sol);
    return o;
}

Outcome run_table1(const Table1Scenario& s, const std::filesystem::path& dir) {
    const auto rows = emit_table1(s.single, s.pair, s.sweep);
    const std::string file = s.name + ".csv";
    write_table1_csv(dir / file, rows);
    Outcome o;
    bool dominance = true;
    json list = json::array();
    for (const auto& row : rows) {
        if (row.dominated && !*row.dominated) dominance = false;
        if (!row.h) o.summary += row.model + " J_opt=" + csv::format(row.objective, csv::kTablePrecision) + " ";
        json e = {{"model", row.model}, {"J", row.objective}};
        e["h"] = row.h ? json(*row.h) : json("opt");
        list.push_back(std::move(e));
    }
    o.summary += dominance ? "dominance=ok" : "dominance=VIOLATED";
    o.outputs = {file};
    o.results = {{"rows", list}, {"dominance", dominance}};
    return o;
}

// Randomized theorem-versus-eigenvalue comparison for `validate --seed`.
std::string cross_check(std::uint64_t seed, int draws) {
    std::mt19937_64 rng(seed);
    const auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    const auto agree = [](const StabilityClass& a, const StabilityClass& b) {
        return a.tag == StabilityTag::Indeterminate || a.tag == b.tag;
    };
    int single_ok = 0, e1_ok = 0, e1_n = 0, e2_ok = 0, e2_n = 0;
    for (int i = 0; i < draws; ++i) {
        const double r = uni(1.05, 8.0);
        const SingleParams sp(r, uni(1e-3, r - 1.0), 0.0);
        const double x2 = *positive_equilibrium_single(sp);
        if (agree(classify_single_theorem(sp, SingleEquilibrium::Positive), classify_by_eigen(derivative_single(sp, x2)))) {
            ++single_ok;
        }
        const double pr = uni(1.05, 8.0);
        const double pk = uni(1e-3, 3.0);
        const double pa = uni(0.01, 1.0);
        const double pc = uni(0.0, 3.0);
        const PairParams pp(pr, pk, pa, pc, uni(0.1, 4.0));
        if (const auto e1 = boundary_equilibrium(pp)) {
            ++e1_n;
            if (agree(classify_e1_theorem(pp), classify_by_eigen(jacobian_pair(pp, *e1)))) ++e1_ok;
        }
        if (const auto e2 = interior_equilibrium(pp)) {
            ++e2_n;
            if (agree(classify_e2_theorem(pp), classify_by_eigen(jacobian_pair(pp, *e2)))) ++e2_ok;
        }
    }
    std::ostringstream os;
    os << "cross-check seed=" << seed << ": single " << single_ok << "/" << draws << ", e1 " << e1_ok << "/" << e1_n
       << ", e2 " << e2_ok << "/" << e2_n << " agree";
    return os.str();
}

}  // namespace

const std::string& scenario_name(const Scenario& s) {
    return std::visit([](const auto& v) -> const std::string& { return v.name; }, s);
}

const char* scenario_kind(const Scenario& s) {
    switch (s.index()) {
        case 0: return "simulate";
        case 1: return "equilibria";
        case 2: return "basin";
        case 3: return "optimize";
        default: return "table1";
    }
}

ScenarioFile parse_scenarios(const json& doc) {
    ObjectReader r(doc, "");
    ScenarioFile file;
    file.raw = doc;
    if (r.has("output_dir")) file.output_dir = r.string("output_dir");
    const json& list = r.at("scenarios");
    if (!list.is_array()) throw ConfigError("scenarios", "expected an array");
    if (list.empty()) throw ValidationError("scenarios: at least one scenario is required");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
        Scenario s = parse_one(list[i], "scenarios[" + std::to_string(i) + "]");
        if (!names.insert(scenario_name(s)).second) {
            throw ValidationError("scenarios[" + std::to_string(i) + "].name: duplicate name '" + scenario_name(s) + "'");
        }
        file.scenarios.push_back(std::move(s));
    }
    r.finish();
    return file;
}

ScenarioFile load_scenarios(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
    }
    if (doc.is_null() || (doc.is_object() && doc.empty())) {
        throw ValidationError(path.string() + ": empty config");
    }
    return parse_scenarios(doc);
}

std::vector<Table1Row> emit_table1(const Table1Side& single, const Table1Side& pair, const SweepConfig& sweep) {
    std::vector<Table1Row> rows;
    for (const auto& [label, side] : {std::pair<std::string, const Table1Side*>{"single", &single},
                                      std::pair<std::string, const Table1Side*>{"pair", &pair}}) {
        const ControlSolution sol = solve_fbs(side->problem, sweep);
        rows.push_back({label, std::nullopt, sol.objective, std::nullopt});
        for (double h : side->constant_h) {
            const std::vector<double> controls(static_cast<std::size_t>(side->problem.horizon), h);
            const double j = objective(side->problem, controls);
            rows.push_back({label, h, j, sol.objective >= j});
        }
    }
    return rows;
}

void write_table1_csv(const std::filesystem::path& path, const std::vector<Table1Row>& rows) {
    csv::Writer w(path);
    w.row({"model", "h", "J", "dominated"});
    for (const auto& row : rows) {
        w.row({row.model, row.h ? csv::format(*row.h, csv::kTablePrecision) : "opt",
               csv::format(row.objective, csv::kTablePrecision),
               row.dominated ? (*row.dominated ? "true" : "false") : ""});
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, bool two_species) {
    csv::Writer w(path);
    w.row(two_species ? std::vector<std::string>{"t", "x", "y"} : std::vector<std::string>{"t", "x"});
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        std::vector<std::string> f{std::to_string(traj.t0 + static_cast<int>(i)),
                                   csv::format(traj.states[i].x, csv::kFullPrecision)};
        if (two_species) f.push_back(csv::format(traj.states[i].y, csv::kFullPrecision));
        w.row(f);
    }
}

void write_solution_csv(const std::filesystem::path& path, const ControlSolution& sol, bool two_species) {
    csv::Writer w(path);
    if (two_species) {
        w.row({"t", "h", "x", "y", "lambda1", "lambda2"});
    } else {
        w.row({"t", "h", "x", "lambda1"});
    }
    for (std::size_t t = 0; t < sol.states.size(); ++t) {
        // The terminal row has no control.
        std::vector<std::string> f{std::to_string(t),
                                   t < sol.controls.size() ? csv::format(sol.controls[t], csv::kFullPrecision) : "",
                                   csv::format(sol.states[t].x, csv::kFullPrecision)};
        if (two_species) f.push_back(csv::format(sol.states[t].y, csv::kFullPrecision));
        f.push_back(csv::format(sol.adjoints.prey[t], csv::kFullPrecision));
        if (two_species) f.push_back(csv::format(sol.adjoints.predator[t], csv::kFullPrecision));
        w.row(f);
    }
}

void write_basin_csv(const std::filesystem::path& path, const BasinReport& rep, int dim) {
    csv::Writer w(path);
    w.row(dim == 2 ? std::vector<std::string>{"x0", "y0", "code", "iters"}
                   : std::vector<std::string>{"x0", "code", "iters"});
    for (const auto& s : rep.samples) {
        std::vector<std::string> f{csv::format(s.x0.x, csv::kFullPrecision)};
        if (dim == 2) f.push_back(csv::format(s.x0.y, csv::kFullPrecision));
        f.push_back(std::to_string(static_cast<int>(s.outcome)));
        f.push_back(std::to_string(s.iterations));
        w.row(f);
    }
}

void write_equilibria_csv(const std::filesystem::path& path, const std::vector<EquilibriumReport>& reports) {
    csv::Writer w(path);
    w.row({"name", "kind", "exists", "x", "y", "theorem", "eigen", "agreement", "lambda1_re", "lambda1_im",
           "lambda2_re", "lambda2_im"});
    for (const auto& rep : reports) {
        std::vector<std::string> f{rep.name, to_string(rep.kind), rep.exists ? "true" : "false"};
        if (!rep.exists) {
            f.insert(f.end(), 9, "");
            w.row(f);
            continue;
        }
        f.push_back(csv::format(rep.point.x, csv::kFullPrecision));
        f.push_back(csv::format(rep.point.y, csv::kFullPrecision));
        f.push_back(to_string(rep.class_theorem->tag));
        f.push_back(to_string(rep.class_eigen->tag));
        f.push_back(rep.agreement ? "true" : "false");
        for (std::size_t i = 0; i < 2; ++i) {
            if (i < rep.eigenvalues.size()) {
                f.push_back(csv::format(rep.eigenvalues[i].real(), csv::kFullPrecision));
                f.push_back(csv::format(rep.eigenvalues[i].imag(), csv::kFullPrecision));
            } else {
                f.push_back("");
                f.push_back("");
            }
        }
        w.row(f);
    }
}

int run_command(const std::string& command, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    static const std::set<std::string> kCommands{"simulate", "equilibria", "basin", "optimize", "table1", "validate"};
    if (!kCommands.contains(command)) {
        err << "error: unknown command '" << command << "'\n";
        return 2;
    }
    ScenarioFile file;
    try {
        file = load_scenarios(opts.config);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return 2;
    }
    if (opts.adjoint_mode) {
        for (Scenario& s : file.scenarios) {
            if (auto* o = std::get_if<OptimizeScenario>(&s)) o->problem.adjoint_mode = *opts.adjoint_mode;
            if (auto* t = std::get_if<Table1Scenario>(&s)) {
                t->single.problem.adjoint_mode = *opts.adjoint_mode;
                t->pair.problem.adjoint_mode = *opts.adjoint_mode;
            }
        }
    }

    if (command == "validate") {
        for (const Scenario& s : file.scenarios) {
            out << "valid " << scenario_kind(s) << " " << scenario_name(s) << "\n";
        }
        if (opts.seed) out << cross_check(*opts.seed, 1000) << "\n";
        return 0;
    }

    const std::filesystem::path dir = opts.out_dir ? *opts.out_dir : std::filesystem::path(file.output_dir.value_or("out"));
    std::filesystem::create_directories(dir);

    json manifest = {{"tool", "popdyn"},
                     {"version", kToolVersion},
                     {"command", command},
                     {"config", opts.config.generic_string()},
                     {"settings",
                      {{"adjoint_mode_override", opts.adjoint_mode ? json(to_string(*opts.adjoint_mode)) : json(nullptr)},
                       {"seed", opts.seed ? json(*opts.seed) : json(nullptr)}}}};
    json entries = json::array();
    int ran = 0;
    for (std::size_t i = 0; i < file.scenarios.size(); ++i) {
        const Scenario& s = file.scenarios[i];
        if (command != scenario_kind(s)) continue;
        ++ran;
        Outcome o;
        try {
            o = std::visit(
                [&](const auto& sc) -> Outcome {
                    using S = std::decay_t<decltype(sc)>;
                    if constexpr (std::is_same_v<S, SimulateScenario>) return run_simulate(sc, dir);
                    else if constexpr (std::is_same_v<S, EquilibriaScenario>) return run_equilibria(sc, dir);
                    else if constexpr (std::is_same_v<S, BasinScenario>) return run_basin(sc, dir);
                    else if constexpr (std::is_same_v<S, OptimizeScenario>) return run_optimize(sc, dir);
                    else return run_table1(sc, dir);
                },
                s);
        } catch (const std::exception& e) {
            err << "error in scenario '" << scenario_name(s) << "': " << e.what() << "\n";
            return 1;
        }
        out << command << " " << scenario_name(s) << ": " << o.summary << " -> " << (dir / o.outputs.front()).generic_string()
            << "\n";
        entries.push_back({{"name", scenario_name(s)},
                           {"kind", scenario_kind(s)},
                           {"input", file.raw["scenarios"][i]},
                           {"outputs", o.outputs},
                           {"results", o.results}});
    }
    if (ran == 0) {
        err << "error: no '" << command << "' scenarios in " << opts.config.generic_string() << "\n";
        return 2;
    }
    manifest["scenarios"] = entries;
    std::ofstream mf(dir / ("manifest_" + command + ".json"), std::ios::binary | std::ios::trunc);
    mf << manifest.dump(2) << "\n";
    return 0;
}

}  // namespace popdyn
