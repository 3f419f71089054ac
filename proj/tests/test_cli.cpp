#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "ppg_test_cli";

// Runs the CLI with `args`, output discarded; returns the exit code.
int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" PPG_CLI "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string dir(const std::string& name) {
    const fs::path p = kRoot / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

const char* kSmallData = "gen-data --angles 40 --axis-seeds 40 --tau-max 3";
const char* kShortTrain = "train --epochs 5 --seed 3";

json read_json(const fs::path& p) { return json::parse(ppg::test::slurp(p)); }

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli("gen-data --bogus 1") == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("gainloss --res 5 --out " + dir("usage")) == 2);
    CHECK(run_cli("train --data " + (kRoot / "absent").string() + " --out " + dir("usage")) == 2);
    CHECK(run_cli("simulate --policy sideways --out " + dir("usage")) == 2);
}

TEST_CASE("help exits with 0") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("gen-data --help") == 0);
}

TEST_CASE("a missing checkpoint is a runtime failure") {
    const std::string out = dir("missing");
    CHECK(run_cli("simulate --model " + out + " --out " + out) == 1);
    CHECK(run_cli("gainloss --res 11 --model " + out + "/model.json --out " + out) == 1);
}

TEST_CASE("small pipeline runs and reruns byte-identically") {
    const std::string a = dir("run_a");
    const std::string b = dir("run_b");
    for (const std::string& out : {a, b}) {
        REQUIRE(run_cli(std::string(kSmallData) + " --out " + out) == 0);
        REQUIRE(run_cli(std::string(kShortTrain) + " --data " + out + " --out " + out) == 0);
        REQUIRE(run_cli("simulate --model " + out + " --out " + out) == 0);
        REQUIRE(run_cli("gainloss --res 11 --delta 0.05,0.2 --model " + out + " --out " + out) == 0);
    }
    for (const char* f : {"dataset.csv", "model.json", "game_times.csv", "gainloss_delta0.05.csv",
                          "gainloss_delta0.2.csv", "trajectory_de0.2_dp0.01.csv"}) {
        INFO(f);
        const std::string first = ppg::test::slurp(fs::path(a) / f);
        CHECK(!first.empty());
        CHECK(first == ppg::test::slurp(fs::path(b) / f));
    }
    const std::string data = ppg::test::slurp(fs::path(a) / "dataset.csv");
    CHECK(data.rfind("x,y,dvx,dvy,v\n", 0) == 0);
    const json gen = read_json(fs::path(a) / "dataset.manifest.json");
    CHECK(gen.at("status") == "done");
    CHECK(gen.at("rows").get<long>() > 0);
    CHECK(gen.at("axis_residual_max").get<double>() <= 1e-3);
    CHECK(gen.at("hamiltonian_residual_max").get<double>() <= 1e-5);
    const json tr = read_json(fs::path(a) / "train.manifest.json");
    CHECK(tr.at("checkpoint_hash") == read_json(fs::path(b) / "train.manifest.json").at("checkpoint_hash"));
    CHECK(tr.at("dataset_hash") == gen.at("dataset_hash"));
    const std::string table = ppg::test::slurp(fs::path(a) / "game_times.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);
    const json side = read_json(fs::path(a) / "gainloss_delta0.2.json");
    CHECK(side.at("checkpoint_hash") == tr.at("checkpoint_hash"));
    CHECK(side.at("res") == 11);

    CHECK(run_cli("render --field value --model " + a + " --res 21 --out " + a) == 0);
    CHECK(run_cli("render --field gain --input " + a + "/gainloss_delta0.2.csv --trajectory " + a +
              "/trajectory_de0.01_dp0.01.csv --output g.svg --out " + a) == 0);
    CHECK(ppg::test::slurp(fs::path(a) / "g.svg").find("<polyline") != std::string::npos);
    CHECK(fs::exists(fs::path(a) / "value.svg"));
}

TEST_CASE("output directory from the environment") {
    const std::string out = dir("env");
    REQUIRE(run_cli(kSmallData, "PPG_OUT_DIR=" + out) == 0);
    CHECK(fs::exists(fs::path(out) / "dataset.csv"));
}

TEST_CASE("config file values are overridden by flags") {
    const std::string out = dir("config");
    std::ofstream(fs::path(out) / "run.conf") << "# small run\nangles = 40\naxis-seeds = 40\n"
                                                 "tau-max = 2\nseed = 99\n";
    REQUIRE(run_cli("gen-data --config " + out + "/run.conf --tau-max 3 --out " + out) == 0);
    const std::string reference = dir("config_ref");
    REQUIRE(run_cli(std::string(kSmallData) + " --out " + reference) == 0);
    CHECK(ppg::test::slurp(fs::path(out) / "dataset.csv") ==
          ppg::test::slurp(fs::path(reference) / "dataset.csv"));
    CHECK(run_cli("gen-data --config " + out + "/absent.conf --out " + out) == 2);
}

TEST_CASE("fixture training reached a tenfold loss reduction") {
    const json m = read_json(ppg::test::fixture_dir() / "train_metrics.json");
    CHECK(m.at("train_loss_ratio").get<double>() <= 0.1);
    CHECK(m.at("val_loss_ratio").get<double>() <= 0.1);
}
