#pragma once

#include <filesystem>
#include <vector>

#include "ppg/feedback.hpp"
#include "ppg/game_core.hpp"
#include "ppg/value_model.hpp"

namespace ppg {

/// Axis threshold used by the closed loop. It matches the data cell size:
/// closer to the y-axis the learned feedback is still mid-transition, and a
/// long evader hold started there wastes a whole period.
inline constexpr double kClosedLoopAxisEpsilon = 0.02;

/// Sampling periods of both players, integrator step and horizon. Both
/// players sample at integer multiples of their period starting from t = 0.
struct SampleHoldConfig {
    double evader_period = 0.01;
    double pursuer_period = 0.01;
    double dt = 1e-3;
    double t_max = 20.0;
    SelectionPolicy policy{SelectionMode::NetworkDirect, kClosedLoopAxisEpsilon};

    /// Throws ConfigError unless 0 < dt <= both periods, both periods are
    /// integer multiples of dt (to 1e-12) and t_max > 0.
    void validate() const;
};

/// One row per integrator step. `controls[i]` is the pair held on the step
/// leaving `states[i]`; the final row holds the pair active at termination.
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<Controls> controls;
    bool terminated = false;
    double game_time = 0.0;  ///< termination time; meaningful only if `terminated`
};

/// Sample-and-hold closed loop under the learned feedback. The state is
/// advanced with fixed RK4 steps and the run ends at the first outward
/// crossing of the terminal circle, possibly inside a hold interval. A run
/// that starts on a terminating point of the circle has game time 0.
/// Horizon exhaustion is reported through `terminated == false`.
Trajectory simulate(const State& start, const MlpModel& model, const SampleHoldConfig& cfg,
                    const GameParams& p);

struct SamplingPair {
    double evader_period = 0.0;
    double pursuer_period = 0.0;
};

struct GameTimeRow {
    SamplingPair pair;
    double game_time = 0.0;
    bool terminated = false;
};

/// Runs simulate once per pair with the step, horizon and policy of `base`.
/// Every pair is validated before the first simulation.
std::vector<GameTimeRow> game_time_table(const State& start, const MlpModel& model,
                                         const std::vector<SamplingPair>& pairs,
                                         const SampleHoldConfig& base, const GameParams& p);

/// CSV with header `delta_e,delta_p,T,terminated`.
void write_game_time_csv(const std::vector<GameTimeRow>& rows, const std::filesystem::path& path);

/// CSV with header `t,x,y,ue,up`.
void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path);
/// A trajectory read back counts as terminated if its last row lies on the
/// terminal circle of `p`.
Trajectory read_trajectory_csv(const std::filesystem::path& path, const GameParams& p = {});

}  // namespace ppg
