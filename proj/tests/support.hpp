#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "ppg/characteristics.hpp"
#include "ppg/game_core.hpp"
#include "ppg/value_model.hpp"

namespace ppg::test {

inline const GameParams kParams{};

/// Directory holding the data set and checkpoint produced by the ctest
/// fixture (gen-data followed by train with default flags).
inline std::filesystem::path fixture_dir() {
    if (const char* env = std::getenv("PPG_FIXTURE_DIR")) return env;
    return PPG_FIXTURE_DIR;
}

inline const MlpModel& trained_model() {
    static const MlpModel m = load_checkpoint(fixture_dir() / "model.json");
    return m;
}

/// Relative dynamics written out independently of the library.
inline std::array<double, 2> ref_dynamics(double x, double y, double ue, double up,
                                          const GameParams& p = kParams) {
    return {-p.evader_turn_rate * y * ue + p.pursuer_speed * std::sin(up),
            p.evader_turn_rate * x * ue - p.evader_speed + p.pursuer_speed * std::cos(up)};
}

/// Classical RK4 with a fixed sub-step, used as the high-resolution oracle.
inline std::array<double, 2> ref_integrate(double x, double y, double ue, double up,
                                           double duration, double substep,
                                           const GameParams& p = kParams) {
    const long n = std::lround(std::ceil(duration / substep - 1e-9));
    const double h = duration / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
        const auto k1 = ref_dynamics(x, y, ue, up, p);
        const auto k2 = ref_dynamics(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], ue, up, p);
        const auto k3 = ref_dynamics(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], ue, up, p);
        const auto k4 = ref_dynamics(x + h * k3[0], y + h * k3[1], ue, up, p);
        x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    return {x, y};
}

/// Uniform point of the closed disc of radius r.
inline State random_in_disc(std::mt19937_64& rng, double r = 1.0) {
    std::uniform_real_distribution<double> u(-r, r);
    for (;;) {
        const State s{u(rng), u(rng)};
        if (s.norm() <= r) return s;
    }
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Forward time from (0, y) to the terminal circle when both players keep the
/// pursuer on the y-axis: on y > 0 the pursuer cancels the evader's turn,
/// below the origin it closes in straight. Simpson quadrature, rho = 1.
inline double axis_time_to_go(double y, const GameParams& p = kParams) {
    const double straight = 1.0 / (p.evader_speed - p.pursuer_speed);
    if (y <= 0.0) return (1.0 + y) * straight;
    auto rate = [&](double s) {
        const double w = p.evader_turn_rate * s;
        return 1.0 / (p.evader_speed - std::sqrt(p.pursuer_speed * p.pursuer_speed - w * w));
    };
    const int n = 4000;
    const double h = y / n;
    double sum = rate(0.0) + rate(y);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * rate(i * h);
    return sum * h / 3.0 + straight;
}

/// Replays the stored controls forward from points[index] with the
/// reference integrator (pursuer heading taken at the middle of each step)
/// and returns the time to the terminal circle. Axis seeds finish along the
/// axis.
inline double replay_oracle(const Characteristic& ch, std::size_t index,
                            const GameParams& p = kParams) {
    const double h = ch.dtau;
    constexpr int kSub = 4;
    double x = ch.points[index].state.x;
    double y = ch.points[index].state.y;
    double t = 0.0;
    for (std::size_t j = index; j > 0; --j) {
        const double ue = ch.controls[j - 1].evader();
        const double up0 = ch.controls[j].pursuer();
        const double up = up0 + 0.5 * angle_diff(ch.controls[j - 1].pursuer(), up0);
        for (int k = 0; k < kSub; ++k) {
            const auto next = ref_integrate(x, y, ue, up, h / kSub, h / kSub, p);
            const double r0 = std::hypot(x, y);
            const double r1 = std::hypot(next[0], next[1]);
            if (r1 > 1.0) return t + h / kSub * (1.0 - r0) / (r1 - r0);
            x = next[0];
            y = next[1];
            t += h / kSub;
        }
    }
    if (ch.seed.kind == SeedKind::Terminal) return t;
    return t + axis_time_to_go(ch.seed.state.y, p);
}

}  // namespace ppg::test
