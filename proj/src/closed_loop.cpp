#include "ppg/closed_loop.hpp"

#include <cmath>
#include <fstream>

#include "csv.hpp"
#include "ppg/errors.hpp"

namespace ppg {

namespace {

constexpr double kMultipleTolerance = 1e-12;

// Number of integrator steps per sampling period.
long steps_per_period(double period, double dt) {
    return std::lround(period / dt);
}

bool is_multiple(double period, double dt) {
    const double k = std::round(period / dt);
    return k >= 1.0 && std::abs(k * dt - period) <= kMultipleTolerance;
}

}  // namespace

void SampleHoldConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrator step must be positive");
    if (!(evader_period > 0.0) || !(pursuer_period > 0.0)) {
        throw ConfigError("sampling periods must be positive");
    }
    if (dt > evader_period || dt > pursuer_period) {
        throw ConfigError("integrator step exceeds a sampling period");
    }
    if (!is_multiple(evader_period, dt)) {
        throw ConfigError("evader sampling period is not a multiple of the integrator step");
    }
    if (!is_multiple(pursuer_period, dt)) {
        throw ConfigError("pursuer sampling period is not a multiple of the integrator step");
    }
    if (!(t_max > 0.0)) throw ConfigError("horizon must be positive");
    policy.validate();
}

Trajectory simulate(const State& start, const MlpModel& model, const SampleHoldConfig& cfg,
                    const GameParams& p) {
    p.validate();
    cfg.validate();
    if (start.norm() > p.surveillance_radius + kCrossingTolerance) {
        throw ConfigError("initial state lies outside the game set");
    }
    const long evader_steps = steps_per_period(cfg.evader_period, cfg.dt);
    const long pursuer_steps = steps_per_period(cfg.pursuer_period, cfg.dt);
    const auto max_steps = static_cast<long>(std::ceil(cfg.t_max / cfg.dt - 1e-9));

    Trajectory tr;
    State s = start;
    double ue = 0.0;
    double up = 0.0;
    for (long n = 0;; ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        const bool evader_samples = n % evader_steps == 0;
        const bool pursuer_samples = n % pursuer_steps == 0;
        if (evader_samples || pursuer_samples) {
            const Controls fresh = select_controls(s, model, cfg.policy).chosen;
            if (evader_samples) ue = fresh.evader();
            if (pursuer_samples) up = fresh.pursuer();
        }
        const Controls held(ue, up);
        tr.times.push_back(t);
        tr.states.push_back(s);
        tr.controls.push_back(held);
        if (n == 0 && terminates_at(s, held, p)) {
            tr.terminated = true;
            tr.game_time = 0.0;
            return tr;
        }
        if (n >= max_steps) return tr;
        if (auto hit = boundary_crossing_dense(s, held, cfg.dt, p)) {
            tr.terminated = true;
            tr.game_time = t + hit->fraction * cfg.dt;
            tr.times.push_back(tr.game_time);
            tr.states.push_back(hit->point);
            tr.controls.push_back(held);
            return tr;
        }
        s = rk4_step(s, held, cfg.dt, p);
    }
}

std::vector<GameTimeRow> game_time_table(const State& start, const MlpModel& model,
                                         const std::vector<SamplingPair>& pairs,
                                         const SampleHoldConfig& base, const GameParams& p) {
    std::vector<SampleHoldConfig> configs;
    for (const auto& pair : pairs) {
        SampleHoldConfig cfg = base;
        cfg.evader_period = pair.evader_period;
        cfg.pursuer_period = pair.pursuer_period;
        cfg.validate();
        configs.push_back(cfg);
    }
    std::vector<GameTimeRow> rows;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Trajectory tr = simulate(start, model, configs[i], p);
        rows.push_back({pairs[i], tr.game_time, tr.terminated});
    }
    return rows;
}

void write_game_time_csv(const std::vector<GameTimeRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "delta_e,delta_p,T,terminated\n";
    for (const GameTimeRow& r : rows) {
        out << detail::format_double(r.pair.evader_period) << ','
            << detail::format_double(r.pair.pursuer_period) << ',' << detail::format_double(r.game_time)
            << ',' << (r.terminated ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "t,x,y,ue,up\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        out << detail::format_double(tr.times[i]) << ',' << detail::format_double(tr.states[i].x)
            << ',' << detail::format_double(tr.states[i].y) << ','
            << detail::format_double(tr.controls[i].evader()) << ','
            << detail::format_double(tr.controls[i].pursuer()) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, const GameParams& p) {
    Trajectory tr;
    for (const auto& r : detail::read_numeric_csv(path, "t,x,y,ue,up")) {
        tr.times.push_back(r[0]);
        tr.states.push_back({r[1], r[2]});
        try {
            tr.controls.emplace_back(r[3], r[4]);
        } catch (const ConfigError& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
    }
    if (!tr.states.empty()) {
        const State& last = tr.states.back();
        tr.terminated = std::abs(last.norm() - p.surveillance_radius) <= kCrossingTolerance;
        tr.game_time = tr.terminated ? tr.times.back() : 0.0;
    }
    return tr;
}

}  // namespace ppg
