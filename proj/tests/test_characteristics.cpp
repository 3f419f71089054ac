#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <tuple>

#include "ppg/characteristics.hpp"
#include "ppg/errors.hpp"
#include "ppg/feedback.hpp"
#include "support.hpp"

using namespace ppg;
using ppg::test::kParams;

namespace {

const Dataset& default_dataset() {
    static const Dataset data = build_dataset(kParams, {});
    return data;
}

double max_hamiltonian(const std::vector<CharacteristicPoint>& points) {
    double worst = 0.0;
    for (const auto& pt : points) {
        const Controls u = optimal_controls(pt.costate, pt.state);
        worst = std::max(worst, std::abs(hamiltonian(pt.state, pt.costate, u, kParams)));
    }
    return worst;
}

}  // namespace

TEST_CASE("terminal costate on the negative axis") {
    const TerminalCondition tc = terminal_costate(kPi, kParams);
    CHECK(std::abs(tc.scale + 2.0) <= 1e-12);
    const Costate l = tc.costate(kParams);
    CHECK(std::abs(l.x) <= 1e-12);
    CHECK(std::abs(l.y - 2.0) <= 1e-12);
}

TEST_CASE("terminal costate at cos = -0.8") {
    const double beta = std::atan2(0.6, -0.8);
    const TerminalCondition tc = terminal_costate(beta, kParams);
    CHECK(std::abs(tc.scale + 5.0) <= 1e-12);
    const Costate l = tc.costate(kParams);
    CHECK(std::abs(l.x + 3.0) <= 1e-12);
    CHECK(std::abs(l.y - 4.0) <= 1e-12);
    const State xt = tc.point(kParams);
    const Controls u = optimal_controls(l, xt);
    CHECK(std::abs(hamiltonian(xt, l, u, kParams)) <= 1e-12);
}

TEST_CASE("terminal costate outside the usable part") {
    const double edge = std::acos(-kParams.pursuer_speed / kParams.evader_speed);
    CHECK_THROWS_AS(terminal_costate(edge, kParams), NotUsable);
    CHECK_THROWS_AS(terminal_costate(0.0, kParams), NotUsable);
    CHECK(std::cos(usable_angle_min(kParams)) <= -kParams.pursuer_speed / kParams.evader_speed);
}

TEST_CASE("every usable terminal condition satisfies H = 0") {
    const double lo = usable_angle_min(kParams);
    for (int i = 0; i <= 100; ++i) {
        const double beta = lo + (kPi - lo) * (0.001 + 0.999 * i / 100.0);
        const TerminalCondition tc = terminal_costate(beta, kParams);
        CHECK(tc.scale < 0.0);
        const State xt = tc.point(kParams);
        const Costate l = tc.costate(kParams);
        CHECK(std::abs(hamiltonian(xt, l, optimal_controls(l, xt), kParams)) <= 1e-12);
    }
}

TEST_CASE("generate_characteristic near the universal line") {
    const Characteristic ch = generate_characteristic(terminal_costate(kPi - 0.01, kParams), 1e-3,
                                                      2.0, kParams);
    REQUIRE(ch.points.size() > 10);
    CHECK(max_hamiltonian(ch.points) <= 1e-5);
    CHECK_THROWS_AS(generate_characteristic(terminal_costate(kPi, kParams), 1e-3, 2.0, kParams),
                    SingularStall);
}

TEST_CASE("first retrograde control follows the switching derivative") {
    const Characteristic ch = generate_characteristic(terminal_costate(2.5, kParams), 1e-3, 2.0,
                                                      kParams);
    REQUIRE(ch.points[0].state.x > 0.5);
    CHECK(ch.controls.front().evader() == -1.0);
}

TEST_CASE("value grows by dtau per step and the costate norm is conserved") {
    const double lo = usable_angle_min(kParams);
    for (double beta : {lo + 0.05, 0.5 * (lo + kPi), 2.5, kPi - 0.2, kPi - 1e-3}) {
        const double dtau = 1e-3;
        const Characteristic ch = generate_characteristic(terminal_costate(beta, kParams), dtau,
                                                          2.0, kParams);
        const double norm0 = ch.points.front().costate.norm();
        double step_error = 0.0;
        double drift = 0.0;
        for (std::size_t k = 1; k < ch.points.size(); ++k) {
            step_error = std::max(
                step_error, std::abs(ch.points[k].value - ch.points[k - 1].value - dtau));
            drift = std::max(drift, std::abs(ch.points[k].costate.norm() - norm0));
        }
        CHECK(step_error <= 1e-12);
        CHECK(drift <= 1e-6 * std::max(1.0, norm0));
        CHECK(max_hamiltonian(ch.points) <= 1e-5);
        for (const auto& pt : ch.points) CHECK(pt.state.norm() <= 1.0 + 1e-6);
    }
}

TEST_CASE("universal line samples") {
    const auto line = universal_line(1e-3, kParams);
    for (const auto& pt : line) {
        CHECK(pt.state.x == 0.0);
        CHECK(std::abs(pt.state.y - (-1.0 + 0.5 * pt.value)) <= 1e-12);
        CHECK(pt.costate.x == 0.0);
        CHECK(std::abs(pt.costate.y - 2.0) <= 1e-12);
    }
    CHECK(std::abs(line.back().state.y) <= 1e-12);
    CHECK(std::abs(line.back().value - 2.0) <= 1e-12);
}

TEST_CASE("axis value matches a quadrature of the axis escape time") {
    for (double y : {-0.9, -0.5, 0.0, 0.2, 0.5, 0.8, 1.0}) {
        CHECK(std::abs(axis_value(y, kParams) - test::axis_time_to_go(y)) <= 1e-6);
    }
    CHECK(std::abs(axis_value(1.0, kParams) - 3.5157) <= 5e-5);
}

TEST_CASE("forward replay reaches the circle at the stored value") {
    DatasetConfig cfg;
    cfg.n_angles = 60;
    cfg.n_axis_seeds = 60;
    const auto seeds = dataset_seeds(kParams, cfg);
    std::mt19937_64 rng(23);
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const auto& seed = seeds[std::uniform_int_distribution<std::size_t>(0, seeds.size() - 1)(rng)];
        const Characteristic ch = trace_characteristic(seed, cfg.dtau, cfg.tau_max, kParams);
        if (ch.points.size() < 2) continue;
        const std::size_t index =
            std::uniform_int_distribution<std::size_t>(1, ch.points.size() - 1)(rng);
        const double t = test::replay_oracle(ch, index);
        CHECK(std::abs(t - ch.points[index].value) <= 5e-3);
        CHECK(std::abs(replay_time(ch, index, kParams) - ch.points[index].value) <= 5e-3);
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("default dataset: Hamiltonian, disc and value range") {
    const Dataset& data = default_dataset();
    REQUIRE(!data.empty());
    CHECK(max_hamiltonian(data) <= 1e-5);
    for (const auto& pt : data) {
        CHECK(pt.value >= 0.0);
        CHECK(pt.state.norm() <= 1.0 + 1e-6);
    }
}

TEST_CASE("default dataset: near-zero values only near the circle") {
    const double dtau = DatasetConfig{}.dtau;
    for (const auto& pt : default_dataset()) {
        if (pt.value <= dtau) CHECK(1.0 - pt.state.norm() <= 2.0 * kParams.evader_speed * dtau);
    }
}

TEST_CASE("default dataset is mirror symmetric") {
    std::map<std::tuple<double, double, double, double, double>, int> count;
    for (const auto& pt : default_dataset()) {
        ++count[{pt.state.x, pt.state.y, pt.costate.x, pt.costate.y, pt.value}];
    }
    for (const auto& pt : default_dataset()) {
        const bool found =
            count.count({-pt.state.x, pt.state.y, -pt.costate.x, pt.costate.y, pt.value}) > 0;
        CHECK(found);
    }
}

TEST_CASE("default dataset: axis oracle") {
    int on_axis = 0;
    for (const auto& pt : default_dataset()) {
        if (std::abs(pt.state.x) <= 1e-6 && pt.state.y >= -1.0 && pt.state.y <= 0.0) {
            CHECK(std::abs(pt.value - 2.0 * (1.0 + pt.state.y)) <= 1e-3);
            ++on_axis;
        }
    }
    CHECK(on_axis > 100);
    const auto nearest = std::min_element(
        default_dataset().begin(), default_dataset().end(),
        [](const auto& a, const auto& b) { return a.state.norm() < b.state.norm(); });
    CHECK(std::abs(nearest->value - 2.0) <= 1e-3);
}

TEST_CASE("dataset CSV round trip and format errors") {
    const auto dir = std::filesystem::temp_directory_path() / "ppg_test_characteristics";
    std::filesystem::create_directories(dir);
    DatasetConfig cfg;
    cfg.n_angles = 20;
    cfg.n_axis_seeds = 20;
    cfg.tau_max = 1.0;
    const Dataset data = build_dataset(kParams, cfg);
    write_dataset_csv(data, dir / "d.csv");
    Dataset back = read_dataset_csv(dir / "d.csv");
    Dataset sorted = data;
    auto key = [](const CharacteristicPoint& a, const CharacteristicPoint& b) {
        return std::tie(a.state.x, a.state.y) < std::tie(b.state.x, b.state.y);
    };
    std::stable_sort(sorted.begin(), sorted.end(), key);
    CHECK(back == sorted);
    CHECK(std::is_sorted(back.begin(), back.end(), key));
    CHECK(test::slurp(dir / "d.csv").rfind("x,y,dvx,dvy,v\n", 0) == 0);

    std::ofstream(dir / "bad_header.csv") << "x,y,v\n0,0,1\n";
    CHECK_THROWS_AS(read_dataset_csv(dir / "bad_header.csv"), FormatError);
    std::ofstream(dir / "short_row.csv") << "x,y,dvx,dvy,v\n0,0,1\n";
    CHECK_THROWS_AS(read_dataset_csv(dir / "short_row.csv"), FormatError);
    CHECK_THROWS_AS(read_dataset_csv(dir / "missing.csv"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("dataset configuration is validated") {
    DatasetConfig cfg;
    cfg.n_angles = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.dtau = 0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
