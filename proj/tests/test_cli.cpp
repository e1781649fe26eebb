#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "cli_scenario.hpp"
#include "locbeta/io.hpp"

using test::run;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("locbeta_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::size_t data_rows(const std::string& csv) {
    std::istringstream in(csv);
    return locbeta::read_csv(in).rows.size();
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"fit", "--h", "0.1"}).code == 1);
    CHECK(run({"simulate", "--m", "abc"}).code == 1);
    CHECK(run({"simulate", "--bogus"}).code == 1);
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("select-bandwidth") != std::string::npos);
    CHECK(run({"fit", "--help"}).code == 0);
}

TEST_CASE("data and validation errors exit with 2") {
    const fs::path dir = scratch("errors");
    CHECK(run({"fit", "--in", (dir / "missing.csv").string(), "--h", "0.1"}).code == 2);
    {
        std::ofstream f(dir / "bad.csv");
        f << "t,y\n0.1,1.5\n";
    }
    CHECK(run({"fit", "--in", (dir / "bad.csv").string(), "--h", "0.1"}).code == 2);
    CHECK(run({"simulate", "--m", "0"}).code == 2);
    CHECK(run({"simulate", "--toy", "--m", "10", "--threads", "0"}).code == 2);
    CHECK(run({"select-bandwidth", "--in", (dir / "bad.csv").string(), "--method", "nope"}).code == 2);
    CHECK(run({"simulate", "--days", "2", "--per-day", "3", "--subsample", "7"}).code == 2);
}

TEST_CASE("numerical failures exit with 3") {
    const fs::path dir = scratch("numerical");
    const std::string data = (dir / "toy.csv").string();
    REQUIRE(run({"simulate", "--toy", "--m", "30", "--seed", "1", "--out", data}).code == 0);
    // A compact kernel this narrow leaves most grid points without data.
    const auto r = run({"fit", "--in", data, "--h", "0.005", "--kernel", "epanechnikov"});
    CHECK(r.code == 3);
    CHECK(r.err.find("0.5") != std::string::npos);
}

TEST_CASE("simulate then fit end to end") {
    const fs::path dir = scratch("e2e");
    const std::string data = (dir / "toy.csv").string();
    REQUIRE(run({"simulate", "--toy", "--m", "201", "--seed", "7", "--out", data}).code == 0);
    CHECK(data_rows(test::slurp(data)) == 201);
    const auto fit = run({"fit", "--in", data, "--degree", "linear", "--h", "0.12", "--json",
                          (dir / "fit.json").string(), "--summary", (dir / "sum.csv").string()});
    REQUIRE(fit.code == 0);
    std::istringstream in(fit.out);
    const locbeta::CsvTable t = locbeta::read_csv(in);
    CHECK(t.header == std::vector<std::string>{"t", "alpha", "beta", "delta", "eta", "converged"});
    CHECK(t.rows.size() == 101);
    CHECK(t.rows.front()[0] == "0");
    CHECK(t.rows.back()[0] == "1");
    CHECK(data_rows(test::slurp(dir / "sum.csv")) == 101);
    CHECK(test::slurp(dir / "fit.json").find("\"bandwidth\"") != std::string::npos);

    const auto sel = run({"select-bandwidth", "--in", data, "--method", "kfold", "--k", "5", "--grid", "0.06,0.12,0.24"});
    REQUIRE(sel.code == 0);
    CHECK(sel.out.find("chosen_h=") != std::string::npos);
    CHECK(sel.out.find("h,cv_naive,cv_approx,nu,aic,cv_kfold") != std::string::npos);

    const auto hours = run({"simulate", "--toy", "--m", "5", "--seed", "1", "--time-unit", "hours24"});
    REQUIRE(hours.code == 0);
    CHECK(hours.out.find("\n24,") != std::string::npos);
}

TEST_CASE("bench reports medians") {
    const auto r = run({"bench", "--m", "60", "--repeats", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("task,median_seconds\n", 0) == 0);
}

TEST_CASE("sessions are reproducible") {
    const fs::path dir = fs::temp_directory_path() / "locbeta_cli_session";
    const test::Transcript a = test::cli_session(dir, 1);
    for (const auto& [k, v] : a) {
        if (k.rfind("step", 0) == 0) CHECK_MESSAGE(v.rfind("exit=0\n", 0) == 0, k << ": " << v);
    }
    CHECK(a.count("file:cohort/cohort.json") == 1);
    CHECK(a.count("file:base/baseline.json") == 1);
    CHECK(a.count("file:eval.csv") == 1);
    const test::Transcript b = test::cli_session(dir, 3);
    const auto diff = test::transcript_diff(a, b);
    for (const auto& k : diff) MESSAGE("differs: " << k);
    CHECK(diff.empty());
    fs::remove_all(dir);
}
