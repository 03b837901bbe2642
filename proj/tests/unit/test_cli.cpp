#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "demine/bench.hpp"

using namespace demine;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "demine");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("demine_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("complexity subcommands") {
    const Run mine = run({"complexity", "mine", "--d", "10000", "--M", "1", "--K", "0.1", "--lip", "1", "--eps", "0.1",
                          "--delta", "0.05"});
    CHECK(mine.code == 0);
    CHECK(std::llabs(std::stoll(mine.out) - 18756256LL) <= 2);
    const Run dem = run({"complexity", "demine", "--L", "-1", "--U", "1", "--eps", "0.1", "--delta", "0.05"});
    CHECK(dem.code == 0);
    CHECK(std::llabs(std::stoll(dem.out) - 10742LL) <= 10);
    const Run eps = run({"complexity", "demine", "--L", "-1", "--U", "1", "--n", "10742"});
    CHECK(std::stod(eps.out) == doctest::Approx(0.1).epsilon(1e-3));
}

TEST_CASE("bad flags give usage and exit 2") {
    const Run r = run({"complexity", "mine", "--bogus", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(run({}).code == 2);
    CHECK(run({"estimate", "--method", "nope"}).code == 2);
}

TEST_CASE("runtime failures give a JSON error record and exit 1") {
    const Run r = run({"complexity", "mine", "--d", "1", "--K", "1e-6", "--eps", "10"});
    CHECK(r.code == 1);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"]["type"] == "domain_error");
    const Run missing = run({"estimate", "--data", "/nonexistent/file.csv"});
    CHECK(missing.code == 1);
    CHECK(nlohmann::json::parse(missing.err)["error"]["type"] == "input_error");
}

TEST_CASE("gen is byte-deterministic and writes a sidecar") {
    const Run a = run({"gen", "gaussian", "--k", "1", "--rho", "0", "--n", "100", "--seed", "7"});
    const Run b = run({"gen", "gaussian", "--k", "1", "--rho", "0", "--n", "100", "--seed", "7"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("x0,z0\n", 0) == 0);
    const auto dir = scratch("gen");
    const auto csv = (dir / "d.csv").string();
    CHECK(run({"gen", "sine", "--n", "50", "--seed", "3", "--out", csv}).code == 0);
    const auto side = nlohmann::json::parse(slurp(csv + ".json"));
    CHECK(side["generator"] == "sine");
    CHECK(side["n"] == 50);
    std::filesystem::remove_all(dir);
}

TEST_CASE("estimate reruns are byte-identical, config file and flags agree") {
    const std::vector<std::string> args{"estimate", "--method", "demine", "--k", "2", "--rho", "0.5", "--n", "200",
                                        "--hidden", "8", "--iterations", "20", "--seeds", "1", "2"};
    const Run a = run(args);
    const Run b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto reports = nlohmann::json::parse(a.out);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0]["seed"] == 1);

    const auto dir = scratch("config");
    nlohmann::json cfg{{"dataset", {{"kind", "gaussian"}, {"k", 2}, {"rho", 0.5}, {"n", 200}}},
                       {"method", "demine"},
                       {"train", {{"hidden", 8}, {"iterations", 20}}},
                       {"seeds", {1, 2}}};
    std::ofstream(dir / "cfg.json") << cfg.dump();
    const Run c = run({"estimate", "--config", (dir / "cfg.json").string()});
    CHECK(c.out == a.out);
    std::filesystem::remove_all(dir);
}

TEST_CASE("estimate methods through the CLI") {
    for (const char* m : {"ksg", "mine-f-es", "meta-demine"}) {
        const Run r = run({"estimate", "--method", m, "--k", "1", "--rho", "0.8", "--n", "120", "--hidden", "8",
                           "--iterations", "5", "--meta-iterations", "2", "--population", "2", "--seed", "4"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["method"] == m);
        CHECK(r.out == run({"estimate", "--method", m, "--k", "1", "--rho", "0.8", "--n", "120", "--hidden", "8",
                            "--iterations", "5", "--meta-iterations", "2", "--population", "2", "--seed", "4"})
                           .out);
    }
}

TEST_CASE("search writes a trace and a best config deterministically") {
    const auto dir = scratch("search");
    auto go = [&](const std::string& tag) {
        return run({"search", "--k", "1", "--rho", "0.8", "--n", "150", "--budget", "3", "--criterion", "sig",
                    "--trace", (dir / (tag + ".csv")).string(), "--out", (dir / (tag + ".json")).string()});
    };
    CHECK(go("a").code == 0);
    CHECK(go("b").code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(nlohmann::json::parse(slurp(dir / "a.json"))["criterion"] == "sig");
    std::filesystem::remove_all(dir);
}

TEST_CASE("bench summary aggregates recompute from rows") {
    std::vector<BenchRow> rows;
    for (std::size_t s = 0; s < 3; ++s) {
        BenchRow r;
        r.point = {"gaussian", 1, 0.5, 0.0, 100};
        r.method = {"demine-sig", "", std::nullopt};
        r.seed_index = s;
        r.report.point_estimate = 0.1 * double(s + 1);
        r.report.epsilon = 0.15;
        r.report.significance = significance_verdict(r.report.point_estimate, 0.15);
        rows.push_back(r);
    }
    const auto summary = summarize(rows);
    REQUIRE(summary.size() == 1);
    CHECK(summary[0].count == 3);
    CHECK(summary[0].mean == doctest::Approx(0.2));
    CHECK(summary[0].std == doctest::Approx(0.1));
    CHECK(summary[0].min == doctest::Approx(0.1));
    CHECK(summary[0].max == doctest::Approx(0.3));
    CHECK(*summary[0].dependent_rate == doctest::Approx(2.0 / 3.0));
    CHECK(*summary[0].mean_epsilon == doctest::Approx(0.15));
}

TEST_CASE("bench suites list their cells") {
    CHECK(suite_points("rho-sweep-20d").size() == 6);
    CHECK(suite_points("n-sweep-sine").size() == 5);
    CHECK(suite_methods("task-augmentation").size() == 25);
    CHECK(cell_seed(1, suite_points("n-sweep-1d")[0], 0) != cell_seed(1, suite_points("n-sweep-1d")[1], 0));
    CHECK_THROWS(suite_points("nope"));
}
