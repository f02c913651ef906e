#include "ymr/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ymr/indexcalc.hpp"
#include "ymr/langevin.hpp"
#include "ymr/model.hpp"
#include "ymr/renorm.hpp"
#include "ymr/runtime.hpp"
#include "ymr/verify.hpp"

namespace ymr {

namespace {

std::string trim(const std::string& s)
{
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

bool parse_long(const std::string& s, long& v)
{
    if (s.empty()) return false;
    size_t used = 0;
    try {
        v = std::stol(s, &used);
    } catch (...) {
        return false;
    }
    return used == s.size();
}

// decimal or a/b
bool parse_double(const std::string& s, double& v)
{
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        double a, b;
        if (!parse_double(s.substr(0, slash), a) || !parse_double(s.substr(slash + 1), b) || b == 0) return false;
        v = a / b;
        return true;
    }
    if (s.empty()) return false;
    size_t used = 0;
    try {
        v = std::stod(s, &used);
    } catch (...) {
        return false;
    }
    return used == s.size() && std::isfinite(v);
}

bool parse_rational(const std::string& s, Rational& r)
{
    auto slash = s.find('/');
    long a, b = 1;
    if (slash == std::string::npos) {
        if (!parse_long(s, a)) return false;
    } else if (!parse_long(trim(s.substr(0, slash)), a) || !parse_long(trim(s.substr(slash + 1)), b) || b == 0) {
        return false;
    }
    r = Rational(a, b);
    return true;
}

// "r" or "r,s" or "r,s,u"
bool parse_graded(const std::string& s, GradedValue& g)
{
    auto parts = split(s, ',');
    if (parts.empty() || parts.size() > 3) return false;
    Rational r;
    long sv = 0, uv = 0;
    if (!parse_rational(parts[0], r)) return false;
    if (parts.size() > 1 && !parse_long(parts[1], sv)) return false;
    if (parts.size() > 2 && !parse_long(parts[2], uv)) return false;
    g = GradedValue(r, sv, uv);
    return true;
}

bool check_type(const std::string& type, const std::string& v)
{
    long l;
    double d;
    Rational r;
    GradedValue g;
    if (type == "int") return parse_long(v, l);
    if (type == "posint") return parse_long(v, l) && l > 0;
    if (type == "real") return parse_double(v, d);
    if (type == "posreal") return parse_double(v, d) && d > 0;
    if (type == "bool") return v == "true" || v == "false" || v == "1" || v == "0";
    if (type == "rational") return parse_rational(v, r) && r > 0;
    if (type == "graded") return parse_graded(v, g);
    if (type == "reals") {
        for (auto& p : split(v, ','))
            if (!parse_double(p, d)) return false;
        return true;
    }
    if (type == "kind") return v == "plain" || v == "modified" || v == "corrected";
    if (type == "algebra") return v == "su2" || v == "abelian" || v == "custom";
    if (type == "suite") return v == "algebra" || v == "route" || v == "symmetry" || v == "stats" || v == "all";
    if (type == "triples") {
        for (auto& t : split(v, ';')) {
            if (t.empty()) continue;
            std::istringstream is(t);
            long a, b, c;
            double f;
            if (!(is >> a >> b >> c >> f)) return false;
        }
        return true;
    }
    if (type == "grid") {
        auto p = split(v, ',');
        long nt, nx;
        return p.size() == 3 && parse_long(p[0], nt) && nt > 0 && parse_long(p[1], nx) && nx > 0 &&
               parse_double(p[2], d) && d > 0;
    }
    return true;   // string
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::schema()
{
    static const std::map<std::string, std::string> s{
        {"grid.Nt", "posint"},          {"grid.Nx", "posint"},          {"grid.L", "posreal"},
        {"lie.algebra", "algebra"},     {"lie.dim_k", "posint"},        {"lie.triples", "triples"},
        {"grades.bound", "graded"},     {"grades.kind", "kind"},        {"grades.eps", "rational"},
        {"grades.eps_minus", "rational"},
        {"kernel.m", "posreal"},
        {"noise.rho", "posreal"},       {"noise.seed", "int"},          {"noise.samples", "posint"},
        {"noise.antithetic", "bool"},
        {"model.c", "reals"},
        {"bphz.lambda_bar", "posreal"}, {"bphz.r", "posint"},           {"bphz.closure", "bool"},
        {"scaling.beta", "string"},     {"scaling.lambdas", "reals"},
        {"cauchy.rho0", "posreal"},     {"cauchy.halvings", "posint"},  {"cauchy.lambda", "posreal"},
        {"langevin.Nx", "posint"},      {"langevin.L", "posreal"},      {"langevin.m", "posreal"},
        {"langevin.g", "real"},         {"langevin.dt", "posreal"},     {"langevin.horizon", "posreal"},
        {"langevin.record_every", "posint"}, {"langevin.blowup", "posreal"}, {"langevin.rho2", "posreal"},
        {"langevin.c", "reals"},
        {"run.workers", "posint"},      {"run.out", "string"},          {"run.suite", "suite"},
        {"run.grid", "grid"},
    };
    return s;
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& where)
{
    auto it = schema().find(key);
    if (it == schema().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!check_type(it->second, value))
        throw ConfigError(where + ": key '" + key + "' expects " + it->second + ", got '" + value + "'");
    values_[key] = {value, where};
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin)
{
    RunConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string where = origin + ":" + std::to_string(lineno);
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (cfg.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        cfg.set(key, trim(line.substr(eq + 1)), where);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path);
}

const RunConfig::Entry& RunConfig::entry(const std::string& key) const
{
    return values_.at(key);
}

std::string RunConfig::str(const std::string& key, const std::string& def) const
{
    return has(key) ? entry(key).value : def;
}

long RunConfig::integer(const std::string& key, long def) const
{
    long v = def;
    if (has(key)) parse_long(entry(key).value, v);
    return v;
}

double RunConfig::real(const std::string& key, double def) const
{
    double v = def;
    if (has(key)) parse_double(entry(key).value, v);
    return v;
}

bool RunConfig::flag(const std::string& key, bool def) const
{
    if (!has(key)) return def;
    auto& v = entry(key).value;
    return v == "true" || v == "1";
}

std::vector<double> RunConfig::reals(const std::string& key) const
{
    std::vector<double> out;
    if (!has(key)) return out;
    for (auto& p : split(entry(key).value, ',')) {
        double d = 0;
        parse_double(p, d);
        out.push_back(d);
    }
    return out;
}

namespace {

struct Env {
    const RunConfig& cfg;
    std::ostream& out;
    std::string outdir;

    void write(const std::string& name, const std::string& content) const
    {
        if (outdir.empty()) return;
        std::filesystem::create_directories(outdir);
        std::ofstream os(std::filesystem::path(outdir) / name);
        if (!os) throw std::runtime_error("cannot write " + name + " in " + outdir);
        os << content;
    }
    void write_json(const std::string& name, const nlohmann::json& j) const { write(name, j.dump(2) + "\n"); }
    std::string path(const std::string& name) const
    {
        std::filesystem::create_directories(outdir);
        return (std::filesystem::path(outdir) / name).string();
    }
};

LieData lie_from(const RunConfig& cfg)
{
    auto alg = cfg.str("lie.algebra", "su2");
    if (alg == "su2") return LieData::su2();
    int dk = static_cast<int>(cfg.integer("lie.dim_k", 3));
    if (alg == "abelian") return LieData::abelian(dk);
    std::vector<std::tuple<int, int, int, double>> t;
    for (auto& s : split(cfg.str("lie.triples", ""), ';')) {
        if (s.empty()) continue;
        std::istringstream is(s);
        int a, b, c;
        double f;
        is >> a >> b >> c >> f;
        if (a < 0 || b < 0 || c < 0 || a >= dk || b >= dk || c >= dk)
            throw ConfigError("lie.triples: index out of range for dim_k " + std::to_string(dk));
        t.emplace_back(a, b, c, f);
    }
    auto lie = LieData::from_triples(dk, t);
    if (lie.jacobi_residual(1) > 1e-10) throw ConfigError("lie.triples: structure constants violate the Jacobi identity");
    return lie;
}

ParabolicGrid grid_from(const RunConfig& cfg, ParabolicGrid def)
{
    if (cfg.has("run.grid")) {
        auto p = split(cfg.str("run.grid", ""), ',');
        double L = 0;
        parse_double(p[2], L);
        def = ParabolicGrid(std::stoi(p[0]), std::stoi(p[1]), L);
    }
    int nt = static_cast<int>(cfg.integer("grid.Nt", def.Nt));
    int nx = static_cast<int>(cfg.integer("grid.Nx", def.Nx));
    double L = cfg.real("grid.L", def.L);
    return ParabolicGrid(nt, nx, L);
}

GradedValue bound_from(const RunConfig& cfg)
{
    GradedValue b = GradedValue::integer(2);
    if (cfg.has("grades.bound")) parse_graded(cfg.str("grades.bound", ""), b);
    return b;
}

RenormConstants constants_from(const RunConfig& cfg, const std::string& key)
{
    RenormConstants c;
    auto v = cfg.reals(key);
    if (v.empty()) return c;
    if (v.size() != 4) throw ConfigError(key + ": expected four constants c1..c4");
    std::copy(v.begin(), v.end(), c.c.begin());
    c.provenance = "config";
    return c;
}

int workers_from(const RunConfig& cfg)
{
    return static_cast<int>(cfg.integer("run.workers", default_workers()));
}

KernelSpec kernel_from(const RunConfig& cfg)
{
    KernelSpec k;
    k.m = cfg.real("kernel.m", 1.0);
    return k;
}

int cmd_indices(const Env& env)
{
    auto& cfg = env.cfg;
    HomParams hp = default_hom();
    if (cfg.has("grades.eps")) parse_rational(cfg.str("grades.eps", ""), hp.eps);
    if (cfg.has("grades.eps_minus")) parse_rational(cfg.str("grades.eps_minus", ""), hp.eps_minus);
    auto ks = cfg.str("grades.kind", "plain");
    GradeKind kind = ks == "plain" ? GradeKind::plain : ks == "modified" ? GradeKind::modified : GradeKind::corrected;
    GradedValue bound = bound_from(cfg);
    auto list = enumerate_populated(bound, kind, hp);
    check_surrogate_order(list, kind, hp);

    // rows of the M' table first, then purely polynomial indices
    nlohmann::json rows = nlohmann::json::array();
    int nprime = 0;
    std::ostringstream csv;
    csv << "beta,grade,grade_numeric,population,Mprime,Mpp\n";
    for (int pass = 0; pass < 2; ++pass)
        for (auto& b : list) {
            auto m = membership(b);
            if (m.in_Mprime != (pass == 0)) continue;
            auto gr = grade(b, kind, hp);
            nprime += m.in_Mprime;
            rows.push_back({{"beta", b.str()},
                            {"grade", gr.to_json()},
                            {"grade_str", gr.str()},
                            {"population", population(b)},
                            {"in_Mprime", m.in_Mprime},
                            {"in_Mpp", m.in_Mpp}});
            csv << '"' << b.str() << "\",\"" << gr.str() << "\"," << gr.to_double(hp.eps, hp.eps_minus) << ","
                << population(b) << "," << m.in_Mprime << "," << m.in_Mpp << "\n";
            env.out << (m.in_Mprime ? "  " : "pp ") << b.str() << "    |beta| = " << gr.str() << "\n";
        }
    env.out << nprime << " indices in M' and " << list.size() - nprime << " purely polynomial below "
            << bound.str() << "\n";
    env.write_json("indices.json", {{"bound", bound.to_json()}, {"kind", ks}, {"count_Mprime", nprime}, {"rows", rows}});
    env.write("indices.csv", csv.str());
    return exit_pass;
}

int cmd_lift(const Env& env)
{
    auto& cfg = env.cfg;
    ModelContext ctx(IndexSet::build(bound_from(cfg), lie_from(cfg).dim_v()), lie_from(cfg),
                     grid_from(cfg, ParabolicGrid(16, 8, 4.0)), kernel_from(cfg));
    auto inst = make_instance(ctx, static_cast<std::uint64_t>(cfg.integer("noise.seed", 1)), cfg.real("noise.rho", 0.5),
                              constants_from(cfg, "model.c"), {{0, 0, 0, 0}});
    auto man = inst.manifest(ctx);
    nlohmann::json files = nlohmann::json::array();
    if (!env.outdir.empty()) {
        inst.xi_rho.save(env.path("xi_rho.bin"));
        for (int i = 0; i < ctx.set.size(); ++i) {
            if (!inst.lift.phi[i]) continue;
            std::string name = "lift_" + std::to_string(i) + ".bin";
            inst.lift.phi[i]->save(env.path(name));
            files.push_back({{"beta", ctx.set.list[i].str()}, {"file", name}});
        }
    }
    man["files"] = files;
    env.write_json("manifest.json", man);
    env.out << "lift built for " << ctx.set.size() << " indices on " << ctx.grid.Nt << "x" << ctx.grid.Nx
            << "^3, seed " << inst.seed << "\n";
    return exit_pass;
}

BphzSettings bphz_settings(const RunConfig& cfg)
{
    BphzSettings s;
    s.grid = grid_from(cfg, s.grid);
    s.rho = cfg.real("noise.rho", s.rho);
    s.lambda_bar = cfg.real("bphz.lambda_bar", s.lambda_bar);
    s.nsamples = static_cast<int>(cfg.integer("noise.samples", s.nsamples));
    s.antithetic = cfg.flag("noise.antithetic", s.antithetic);
    s.seed = static_cast<std::uint64_t>(cfg.integer("noise.seed", static_cast<long>(s.seed)));
    s.workers = workers_from(cfg);
    s.r = static_cast<int>(cfg.integer("bphz.r", s.r));
    return s;
}

int cmd_bphz(const Env& env)
{
    auto& cfg = env.cfg;
    auto lie = lie_from(cfg);
    auto s = bphz_settings(cfg);
    auto c = fix_bphz_constants(lie, s, kernel_from(cfg));
    nlohmann::json rep{{"constants", c.to_json()}};
    env.out << "c = (" << c[1] << ", " << c[2] << ", " << c[3] << ", " << c[4] << ")\n";
    if (cfg.flag("bphz.closure", false)) {
        nlohmann::json cl = nlohmann::json::array();
        for (auto& e : bphz_closure(lie, c, s, kernel_from(cfg))) {
            cl.push_back({{"beta", e.beta.str()}, {"type", static_cast<int>(e.type) + 1}, {"estimate", e.est.to_json()},
                          {"within_3se", e.pass}});
            env.out << "  " << e.beta.str() << "  mean " << e.est.proj_mean << " se " << e.est.proj_se
                    << (e.pass ? "  ok\n" : "  outside 3 SE\n");
        }
        rep["closure"] = cl;
    }
    env.write_json("bphz.json", rep);
    // exact: an abelian algebra has no counterterm
    if (lie.is_abelian() && std::any_of(c.c.begin(), c.c.end(), [](double v) { return v != 0.0; })) {
        env.out << "abelian algebra produced nonzero constants\n";
        return exit_assertion;
    }
    return exit_pass;
}

int cmd_verify(const Env& env)
{
    auto& cfg = env.cfg;
    auto lie = lie_from(cfg);
    auto suite = cfg.str("run.suite", "algebra");
    SuiteSettings s;
    s.c = constants_from(cfg, "model.c");
    s.nsamples = static_cast<int>(cfg.integer("noise.samples", s.nsamples));
    s.seed = static_cast<std::uint64_t>(cfg.integer("noise.seed", static_cast<long>(s.seed)));
    s.rho = cfg.real("noise.rho", s.rho);
    auto bound = bound_from(cfg);

    std::vector<SuiteReport> reports;
    auto run = [&](const std::string& name, ParabolicGrid g, auto fn) {
        if (suite != name && suite != "all") return;
        ModelContext ctx(IndexSet::build(bound, lie.dim_v()), lie, grid_from(cfg, g), kernel_from(cfg));
        reports.push_back(fn(ctx, s));
    };
    run("algebra", ParabolicGrid(16, 8, 4.0), algebraic_invariant_suite);
    run("route", ParabolicGrid(8, 4, 2.2), route_equivalence_suite);
    run("symmetry", ParabolicGrid(9, 5, 2.5), symmetry_suite);
    run("stats", ParabolicGrid(16, 8, 4.0), stochastic_stats_suite);

    bool ok = true;
    nlohmann::json all = nlohmann::json::array();
    for (auto& r : reports) {
        for (auto& it : r.items)
            env.out << r.suite << "  " << it.name << "  " << it.value << " (tol " << it.tol << ")  "
                    << (it.pass ? "pass" : it.fatal ? "FAIL" : "outside (not fatal)") << "\n";
        ok = ok && r.pass();
        all.push_back(r.to_json());
    }
    env.write_json("verify_" + suite + ".json", {{"seed", s.seed}, {"samples", s.nsamples}, {"reports", all}});
    return ok ? exit_pass : exit_assertion;
}

int cmd_scaling(const Env& env)
{
    auto& cfg = env.cfg;
    auto lie = lie_from(cfg);
    ScalingSettings s;
    s.grid = grid_from(cfg, s.grid);
    s.rho = cfg.real("noise.rho", s.rho);
    s.lambdas = cfg.reals("scaling.lambdas");
    s.nsamples = static_cast<int>(cfg.integer("noise.samples", s.nsamples));
    s.seed = static_cast<std::uint64_t>(cfg.integer("noise.seed", static_cast<long>(s.seed)));
    s.workers = workers_from(cfg);
    auto beta = MultiIndex::parse(cfg.str("scaling.beta", "0"));
    auto full = IndexSet::build(bound_from(cfg), lie.dim_v());
    if (full.find(beta) < 0) throw ConfigError("scaling.beta: " + beta.str() + " is not in the index set");
    // the zero index needs nothing else
    IndexSet set = beta.is_zero() ? full.restricted([](const MultiIndex& b) { return b.is_zero(); }) : full;
    ModelContext ctx(set, lie, s.grid, kernel_from(cfg));
    auto rep = scaling_exponent_fit(ctx, ctx.set.find(beta), s);
    env.out << "slope " << rep.slope << " +- " << rep.slope_se << " over " << rep.lambdas.size() << " scales\n";
    auto j = rep.to_json();
    j["beta"] = beta.str();
    env.write_json("scaling.json", j);
    env.write("scaling.csv", rep.csv());
    return exit_pass;
}

int cmd_cauchy(const Env& env)
{
    auto& cfg = env.cfg;
    auto lie = lie_from(cfg);
    auto beta = MultiIndex::parse(cfg.str("scaling.beta", "0"));
    auto full = IndexSet::build(bound_from(cfg), lie.dim_v());
    if (full.find(beta) < 0) throw ConfigError("scaling.beta: " + beta.str() + " is not in the index set");
    IndexSet set = beta.is_zero() ? full.restricted([](const MultiIndex& b) { return b.is_zero(); }) : full;
    ModelContext ctx(set, lie, grid_from(cfg, ScalingSettings{}.grid), kernel_from(cfg));
    double rho0 = cfg.real("cauchy.rho0", 0.5);
    int halvings = static_cast<int>(cfg.integer("cauchy.halvings", 4));
    std::vector<double> rhos;
    for (int j = 0; j <= halvings; ++j) rhos.push_back(rho0 * std::pow(0.5, j));
    auto rep = cauchy_in_rho(ctx, ctx.set.find(beta), rhos, cfg.real("cauchy.lambda", 1.0),
                             static_cast<int>(cfg.integer("noise.samples", 64)),
                             static_cast<std::uint64_t>(cfg.integer("noise.seed", 13)), workers_from(cfg));
    env.out << "ratios";
    for (double r : rep.ratios) env.out << " " << r;
    env.out << "\n";
    env.write_json("cauchy.json", rep.to_json());
    env.write("cauchy.csv", rep.csv());
    return exit_pass;
}

int cmd_langevin(const Env& env)
{
    auto& cfg = env.cfg;
    auto lie = lie_from(cfg);
    LangevinConfig lc;
    lc.Nx = static_cast<int>(cfg.integer("langevin.Nx", lc.Nx));
    lc.L = cfg.real("langevin.L", lc.L);
    lc.m = cfg.real("langevin.m", lc.m);
    lc.g = cfg.real("langevin.g", lc.g);
    lc.rho = cfg.real("noise.rho", lc.rho);
    lc.c = cfg.has("langevin.c") ? constants_from(cfg, "langevin.c") : constants_from(cfg, "model.c");
    lc.dt = cfg.real("langevin.dt", lc.dt);
    lc.horizon = cfg.real("langevin.horizon", lc.horizon);
    lc.record_every = static_cast<int>(cfg.integer("langevin.record_every", lc.record_every));
    lc.seed = static_cast<std::uint64_t>(cfg.integer("noise.seed", static_cast<long>(lc.seed)));
    lc.blowup = cfg.real("langevin.blowup", lc.blowup);

    LangevinIntegrator integ(lie, lc);
    auto tr = integ.run(GridField(integ.grid(), integ.dim_v()), true);
    nlohmann::json rep{{"Nx", lc.Nx}, {"L", lc.L},   {"m", lc.m},           {"g", lc.g},
                       {"rho", lc.rho}, {"dt", lc.dt}, {"horizon", lc.horizon}, {"seed", lc.seed},
                       {"c", lc.c.to_json()}, {"final_l2", tr.l2.back()}};
    env.out << "final L2 norm " << tr.l2.back() << " at t = " << tr.times.back() << "\n";
    if (cfg.has("langevin.rho2")) {
        auto cr = run_coupled_comparison(lie, lc, lc.rho, cfg.real("langevin.rho2", lc.rho / 2));
        rep["coupled"] = cr.to_json();
        env.out << "coupled distance with counterterm " << cr.distance_with << ", without " << cr.distance_without
                << " (experimental, not asserted)\n";
    }
    env.write_json("langevin.json", rep);
    env.write("trajectory.csv", tr.csv());
    if (!env.outdir.empty()) tr.final.save(env.path("final.bin"));
    return exit_pass;
}

}  // namespace

int execute(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    Env env{cfg, out, cfg.str("run.out", "")};
    try {
        if (command == "indices") return cmd_indices(env);
        if (command == "lift") return cmd_lift(env);
        if (command == "bphz") return cmd_bphz(env);
        if (command == "verify") return cmd_verify(env);
        if (command == "scaling") return cmd_scaling(env);
        if (command == "cauchy") return cmd_cauchy(env);
        if (command == "langevin") return cmd_langevin(env);
        err << "unknown command '" << command << "'\n";
        return exit_config;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "invalid setting: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalAbort& e) {
        err << "numerical abort: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"multi-index models for the renormalized 3D Yang-Mills Langevin equation"};
    std::string command, config, grid, out_dir, bound, kind, suite;
    std::optional<long> seed, samples, workers;
    std::optional<double> rho;
    bool abelian = false;
    app.add_option("command", command, "indices | lift | bphz | verify | scaling | cauchy | langevin")->required();
    app.add_option("--config", config, "key=value configuration file");
    app.add_option("--seed", seed, "run seed");
    app.add_option("--samples", samples, "noise samples");
    app.add_option("--rho", rho, "mollification scale");
    app.add_option("--grid", grid, "Nt,Nx,L");
    app.add_option("--out", out_dir, "artifact directory");
    app.add_option("--bound", bound, "grade bound r[,s[,u]]");
    app.add_option("--kind", kind, "plain | modified | corrected");
    app.add_option("--suite", suite, "algebra | route | symmetry | stats | all");
    app.add_option("--workers", workers, "worker threads");
    app.add_flag("--abelian", abelian, "use an abelian algebra (dim 3)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_config;
    }
    RunConfig cfg;
    try {
        if (!config.empty()) cfg = RunConfig::load(config);
        if (seed) cfg.set("noise.seed", std::to_string(*seed), "--seed");
        if (samples) cfg.set("noise.samples", std::to_string(*samples), "--samples");
        if (rho) {
            std::ostringstream os;
            os.precision(17);
            os << *rho;
            cfg.set("noise.rho", os.str(), "--rho");
        }
        if (!grid.empty()) cfg.set("run.grid", grid, "--grid");
        if (!out_dir.empty()) cfg.set("run.out", out_dir, "--out");
        if (!bound.empty()) cfg.set("grades.bound", bound, "--bound");
        if (!kind.empty()) cfg.set("grades.kind", kind, "--kind");
        if (!suite.empty()) cfg.set("run.suite", suite, "--suite");
        if (workers) cfg.set("run.workers", std::to_string(*workers), "--workers");
        if (abelian) cfg.set("lie.algebra", "abelian", "--abelian");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    }
    return execute(command, cfg, out, err);
}

}  // namespace ymr
