#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "comire/cli.hpp"
#include "comire/errors.hpp"
#include "comire/io.hpp"
#include "tempdir.hpp"

using namespace comire;
using testing::read_text;
using testing::TempDir;
using testing::write_text;

namespace {

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "comire");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_text) *err_text = err.str();
    return code;
}

std::vector<std::string> lines(const std::filesystem::path& p) {
    std::istringstream in(read_text(p));
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::size_t columns(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

// Small scenario-1 fit shared by the risk and check tests.
struct SmallFit {
    TempDir dir;
    std::filesystem::path data;
    std::filesystem::path fit;

    SmallFit() {
        REQUIRE(run({"simulate", "--n", "200", "--out", dir.path().string()}) == 0);
        data = dir / "data.csv";
        fit = dir / "fit";
        REQUIRE(run({"fit", "--data", data.string(), "--iterations", "700", "--burn-in", "200", "--thin", "2",
                     "--chains", "2", "--seed", "5", "--out", fit.string()}) == 0);
    }
};

}  // namespace

TEST_CASE("simulate writes data, truth and manifest") {
    TempDir dir;
    REQUIRE(run({"simulate", "--scenario", "1", "--n", "500", "--seed", "42", "--out", dir.path().string()}) == 0);
    const auto rows = lines(dir / "data.csv");
    CHECK(rows.size() == 501);
    CHECK(rows[0] == "x,y");
    CHECK(read_dataset_csv(dir / "data.csv").data.size() == 500);
    const auto truth = read_json(dir / "truth.json");
    CHECK(truth["mu_inf"] == 36.0);
    const auto m = read_json(dir / "manifest_simulate.json");
    CHECK(m["seed"] == 42);
    CHECK(m["output_digests"]["data"] == sha256_file(dir / "data.csv"));

    TempDir again;
    REQUIRE(run({"simulate", "--scenario", "1", "--n", "500", "--seed", "42", "--out", again.path().string()}) == 0);
    for (const char* f : {"data.csv", "truth.json", "manifest_simulate.json"}) {
        CHECK(read_text(dir / f) == read_text(again / f));
    }
}

TEST_CASE("simulate rejects bad scenarios and flags") {
    TempDir dir;
    CHECK(run({"simulate", "--scenario", "4", "--out", dir.path().string()}) == 2);
    CHECK(run({"simulate", "--n", "0", "--out", dir.path().string()}) == 2);
    CHECK(run({"simulate", "--bogus", "--out", dir.path().string()}) == 2);
    CHECK(run({}) == 2);
    CHECK_THROWS_AS(cmd_simulate({.scenario = 0, .out = dir.path()}), UsageError);
}

TEST_CASE("fit writes per-chain draws and a manifest") {
    TempDir dir;
    REQUIRE(run({"simulate", "--n", "120", "--out", dir.path().string()}) == 0);
    std::ostringstream log;
    FitOptions o;
    o.data = dir / "data.csv";
    o.iterations = 300;
    o.burn_in = 100;
    o.thin = 5;
    o.chains = 2;
    o.out = dir / "fit";
    const auto r = cmd_fit(o, log);
    CHECK(r.observations == 120);
    CHECK(r.retained == 40);
    REQUIRE(r.draw_files.size() == 2);
    CHECK(lines(r.draw_files[0]).size() == 41);
    const auto m = read_json(r.manifest);
    CHECK(m["config"]["H"] == 10);
    CHECK(m["config"]["J"] == 10);
    CHECK(m["settings"]["iterations"] == 300);
    CHECK(m["input"]["sha256"] == sha256_file(dir / "data.csv"));
    CHECK(m["retained_per_chain"] == 40);

    const auto loaded = load_fit(dir / "fit");
    CHECK(loaded.draws.size() == 80);
    CHECK(load_fit(r.draw_files[1]).draws.size() == 40);
}

TEST_CASE("fit honours config files") {
    TempDir dir;
    REQUIRE(run({"simulate", "--n", "100", "--out", dir.path().string()}) == 0);
    for (int H : {5, 15}) {
        const auto cfg = dir / ("h" + std::to_string(H) + ".json");
        write_text(cfg, "{\"H\": " + std::to_string(H) + ", \"iterations\": 60, \"burn_in\": 20, \"thin\": 2}");
        const auto out = dir / ("fit" + std::to_string(H));
        REQUIRE(run({"fit", "--data", (dir / "data.csv").string(), "--config", cfg.string(), "--out", out.string()}) ==
                0);
        const auto m = read_json(out / "manifest_fit.json");
        CHECK(m["config"]["H"] == H);
        CHECK(m["retained_per_chain"] == 20);
        CHECK(m["config_file"]["sha256"] == sha256_file(cfg));
    }
    // Flags win over the file.
    write_text(dir / "c.json", R"({"iterations": 60, "burn_in": 20, "thin": 2})");
    REQUIRE(run({"fit", "--data", (dir / "data.csv").string(), "--config", (dir / "c.json").string(), "--thin", "4",
                 "--out", (dir / "f").string()}) == 0);
    CHECK(read_json(dir / "f" / "manifest_fit.json")["retained_per_chain"] == 10);

    write_text(dir / "bad.json", R"({"H": 5, "colour": "red"})");
    CHECK(run({"fit", "--data", (dir / "data.csv").string(), "--config", (dir / "bad.json").string(), "--out",
               (dir / "g").string()}) == 3);
    CHECK(run({"fit", "--data", (dir / "data.csv").string(), "--burn-in", "10", "--iterations", "5", "--out",
               (dir / "g").string()}) == 3);
}

TEST_CASE("fit reports ingestion errors") {
    TempDir dir;
    write_text(dir / "noy.csv", "x,z\n1,2\n");
    std::string err;
    CHECK(run({"fit", "--data", (dir / "noy.csv").string(), "--out", (dir / "o").string()}, &err) == 4);
    CHECK(err.find("'y'") != std::string::npos);
    write_text(dir / "neg.csv", "x,y\n1,38\n-2,37\n");
    CHECK(run({"fit", "--data", (dir / "neg.csv").string(), "--out", (dir / "o").string()}, &err) == 4);
    CHECK(err.find("row 3") != std::string::npos);
}

TEST_CASE("risk and check on a small fit") {
    SmallFit f;
    const auto rdir = f.dir / "risk";
    REQUIRE(run({"risk", "--draws", f.fit.string(), "--out", rdir.string()}) == 0);
    const auto bmd = lines(rdir / "bmd.csv");
    REQUIRE(bmd.size() == 4);
    CHECK(bmd[0] == "q,bmd_mean,bmd_lo,bmd_hi,bmdl");
    CHECK(bmd[1].rfind("0.01,", 0) == 0);
    const auto curve = lines(rdir / "risk_curve.csv");
    CHECK(curve.size() == 101);
    CHECK(curve[0] == "x,mean,lo95,hi95");
    CHECK(curve[1] == "0,0,0,0");

    SUBCASE("saturated threshold gives zero risk") {
        std::ostringstream log;
        RiskOptions o;
        o.draws = f.fit;
        o.threshold = 1000.0;
        o.out = f.dir / "risk_hi";
        cmd_risk(o, log);
        // F_0(a) and F_inf(a) are both 1 up to rounding.
        for (const auto& row : lines(o.out / "risk_curve.csv")) {
            if (row[0] == 'x') continue;
            std::istringstream cells(row);
            std::string c;
            std::getline(cells, c, ',');  // dose
            while (std::getline(cells, c, ',')) CHECK(std::fabs(std::stod(c)) < 1e-12);
        }
        CHECK(lines(o.out / "bmd.csv")[1] == "0.01,NA,NA,NA,NA");
    }

    SUBCASE("empty q list") {
        std::ostringstream log;
        RiskOptions o;
        o.draws = f.fit;
        o.q.clear();
        o.out = f.dir / "risk_empty";
        CHECK_THROWS_AS(cmd_risk(o, log), UsageError);
        CHECK(run({"risk", "--draws", f.fit.string(), "--q", "0.5,1.5", "--out", o.out.string()}) == 2);
    }

    SUBCASE("single draw gives zero-width intervals") {
        const auto one = f.dir / "one";
        std::filesystem::create_directories(one);
        const auto all = lines(f.fit / "draws_chain1.csv");
        write_text(one / "draws_chain1.csv", all[0] + "\n" + all[1] + "\n");
        auto m = read_json(f.fit / "manifest_fit.json");
        m["outputs"] = {{{"chain", 1}, {"draws", "draws_chain1.csv"}}};
        write_json(one / "manifest_fit.json", m);
        REQUIRE(run({"risk", "--draws", one.string(), "--out", (f.dir / "r1").string()}) == 0);
        for (const auto& row : lines(f.dir / "r1" / "risk_curve.csv")) {
            if (row[0] == 'x') continue;
            const auto lo_start = row.find(',', row.find(',') + 1) + 1;
            const auto hi_start = row.find(',', lo_start) + 1;
            CHECK(row.substr(lo_start, hi_start - lo_start - 1) == row.substr(hi_start));
        }
    }

    SUBCASE("check writes ppc and geweke tables") {
        const auto cdir = f.dir / "check";
        REQUIRE(run({"check", "--draws", f.fit.string(), "--data", f.data.string(), "--out", cdir.string()}) == 0);
        const auto ppc = lines(cdir / "ppc.csv");
        CHECK(ppc.size() == 101);
        CHECK(columns(ppc[0]) == 52);
        const auto gw = lines(cdir / "geweke.csv");
        CHECK(gw.size() == 1 + 2 * 9);
        for (const char* name : {"mean_zero", "mu_inf", "tau_inf", "cdf_zero", "cdf_inf", "risk_inf"}) {
            CHECK(read_text(cdir / "geweke.csv").find(std::string("\"") + name + "\"") != std::string::npos);
        }
        CHECK(read_json(cdir / "manifest_check.json")["replicates"] == 50);

        // A different dataset from the one fitted is fine.
        TempDir other;
        REQUIRE(run({"simulate", "--scenario", "3", "--n", "80", "--out", other.path().string()}) == 0);
        CHECK(run({"check", "--draws", f.fit.string(), "--data", (other / "data.csv").string(), "--replicates", "10",
                   "--out", (f.dir / "check2").string()}) == 0);
        CHECK(run({"check", "--draws", f.fit.string(), "--data", f.data.string(), "--replicates", "0", "--out",
                   (f.dir / "check3").string()}) == 2);
    }
}

TEST_CASE("end-to-end determinism") {
    std::vector<std::string> files;
    TempDir a;
    TempDir b;
    for (const TempDir* d : {&a, &b}) {
        const std::string root = d->path().string();
        REQUIRE(run({"simulate", "--n", "150", "--seed", "11", "--out", root}) == 0);
        REQUIRE(run({"fit", "--data", root + "/data.csv", "--iterations", "200", "--burn-in", "50", "--thin", "3",
                     "--chains", "2", "--seed", "3", "--out", root + "/fit"}) == 0);
        REQUIRE(run({"risk", "--draws", root + "/fit", "--out", root + "/risk"}) == 0);
    }
    for (const char* f : {"data.csv", "fit/draws_chain1.csv", "fit/draws_chain2.csv", "risk/risk_curve.csv",
                          "risk/beta_curve.csv", "risk/bmd.csv"}) {
        CHECK_MESSAGE(read_text(a / f) == read_text(b / f), f);
    }
}
