#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ymr/cli.hpp"

using namespace ymr;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "ymr");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    Run r;
    r.code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("ymr_cli_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config grammar")
{
    auto cfg = RunConfig::parse("# comment\n[grid]\nNx = 8   # trailing\nL = 2.2\n\n[noise]\nrho=1/4\n");
    CHECK(cfg.integer("grid.Nx", 0) == 8);
    CHECK(cfg.real("grid.L", 0) == 2.2);
    CHECK(cfg.real("noise.rho", 0) == 0.25);
    CHECK(cfg.integer("grid.Nt", 7) == 7);

    auto bad = [](const std::string& text) {
        try {
            RunConfig::parse(text, "f.cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(bad("[grid]\nNx = 8\nfoo = 1\n") == "f.cfg:3: unknown key 'grid.foo'");
    CHECK(bad("[grid]\nNx = eight\n").find("f.cfg:2: key 'grid.Nx' expects") == 0);
    CHECK(bad("[grid]\nNx = 8\nNx = 9\n").find("f.cfg:3: duplicate key") == 0);
    CHECK(bad("[grid\n").find("f.cfg:1: malformed section") == 0);
    CHECK(bad("justtext\n").find("f.cfg:1: expected key = value") == 0);
    CHECK(bad("[lie]\nalgebra = so3\n").find("f.cfg:2:") == 0);
    CHECK(bad("[grades]\nbound = 2,x\n").find("f.cfg:2:") == 0);
}

TEST_CASE("indices command lists the table below 2")
{
    auto dir = scratch("indices");
    auto r = cli({"indices", "--bound", "2", "--kind", "plain", "--out", dir.string()});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(dir / "indices.json"));
    CHECK(j["count_Mprime"] == 19);
    CHECK(j["rows"].size() == 23);
    CHECK(j["rows"][0]["beta"] == "0");
    CHECK(j["rows"][0]["grade"]["r"] == "-1/2");
    CHECK(j["rows"][0]["grade"]["s"] == -1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes")
{
    CHECK(cli({"nonsense"}).code == 2);
    CHECK(cli({"indices", "--bound", "x"}).code == 2);
    CHECK(cli({"indices", "--config", "/nonexistent/file.cfg"}).code == 2);
    CHECK(cli({"indices", "--frobnicate"}).code == 2);
    // a grid whose origin cell leaves the kernel's unit region is a configuration error
    CHECK(cli({"lift", "--grid", "4,2,8"}).code == 2);

    auto dir = scratch("abort");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "blow.cfg") << "[langevin]\nNx = 8\ng = 1\ndt = 0.01\nhorizon = 0.1\nblowup = 1e-4\n";
    auto r = cli({"langevin", "--config", (dir / "blow.cfg").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("numerical abort") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("abelian BPHZ constants vanish")
{
    auto dir = scratch("bphz");
    auto r = cli({"bphz", "--abelian", "--grid", "8,4,2.2", "--samples", "2", "--out", dir.string()});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(dir / "bphz.json"));
    for (auto& v : j["constants"]["c"]) CHECK(v.get<double>() == 0.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("verify reruns are byte-identical")
{
    auto a = scratch("verify_a"), b = scratch("verify_b");
    std::vector<std::string> args{"verify", "--suite", "algebra", "--seed", "7", "--samples", "1"};
    auto ra = args, rb = args;
    ra.insert(ra.end(), {"--out", a.string()});
    rb.insert(rb.end(), {"--out", b.string()});
    auto x = cli(ra), y = cli(rb);
    CHECK(x.code == 0);
    CHECK(y.code == 0);
    CHECK(x.out == y.out);
    auto fa = slurp(a / "verify_algebra.json");
    CHECK(!fa.empty());
    CHECK(fa == slurp(b / "verify_algebra.json"));
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST_CASE("lift and langevin artifacts")
{
    auto dir = scratch("lift");
    auto r = cli({"lift", "--grid", "8,4,2.2", "--seed", "3", "--out", dir.string()});
    CHECK(r.code == 0);
    auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["seed"] == 3);
    CHECK(m["indices"].size() == 23);
    CHECK(std::filesystem::exists(dir / "xi_rho.bin"));
    std::filesystem::remove_all(dir);

    auto ld = scratch("langevin");
    std::filesystem::create_directories(ld);
    std::ofstream(ld / "l.cfg") << "[langevin]\nNx = 8\nhorizon = 0.2\nrho2 = 0.0625\n[noise]\nrho = 0.125\n";
    r = cli({"langevin", "--config", (ld / "l.cfg").string(), "--abelian", "--out", (ld / "o").string()});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(ld / "o" / "langevin.json"));
    CHECK(j["coupled"]["distance_with_counterterm"] == j["coupled"]["distance_without_counterterm"]);
    CHECK(slurp(ld / "o" / "trajectory.csv").rfind("t,l2\n", 0) == 0);
    std::filesystem::remove_all(ld);
}
