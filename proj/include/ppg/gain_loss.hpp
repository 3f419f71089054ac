#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "ppg/characteristics.hpp"
#include "ppg/feedback.hpp"
#include "ppg/game_core.hpp"
#include "ppg/value_model.hpp"

namespace ppg {

/// Value of a state; zero outside the game set.
using ValueFunction = std::function<double(const State&)>;

/// Learned value head extended by 0 outside the game set and clamped at 0.
double value_eval(const State& s, const MlpModel& m, const GameParams& p);

ValueFunction model_value(const MlpModel& m, const GameParams& p);

/// Value of the nearest data point (Euclidean), zero outside the game set.
class NearestNeighbourValue {
public:
    NearestNeighbourValue(Dataset data, const GameParams& p, double bucket = 0.02);
    double operator()(const State& s) const;

private:
    std::size_t bucket_index(long ix, long iy) const;

    Dataset data_;
    GameParams params_;
    double bucket_;
    long buckets_per_side_;
    std::vector<std::vector<std::size_t>> buckets_;
};

struct GainLossConfig {
    int evader_grid = 201;        ///< coarse grid on [-1, 1]
    int pursuer_grid = 360;       ///< coarse grid on (-pi, pi]
    int pursuer_refine = 3;       ///< best coarse cells refined for the pursuer
    double golden_tolerance = 1e-4;
    SelectionPolicy policy;

    void validate() const;
};

/// State after holding `c` for `duration`, or nothing if the flow leaves the
/// game set first. The step is min(1e-3, duration / 10).
std::optional<State> hold_flow(const State& start, const Controls& c, double duration,
                               const GameParams& p);

/// duration + V(hold_flow), with V = 0 after an exit.
double hold_value(const State& start, const Controls& c, double duration,
                  const ValueFunction& value, const GameParams& p);

/// Evader's best single hold against the pursuer's feedback selection:
/// min over u_e in [-1, 1] and the pursuer candidates at `start`.
double v_min_delta(const State& start, double delta, const MlpModel& m,
                   const ValueFunction& value, const GameParams& p,
                   const GainLossConfig& cfg = {});

/// Pursuer's best single hold against the evader's feedback selection. In the
/// analytic mode a singular evader candidate stands for both -1 and +1.
double v_max_delta(const State& start, double delta, const MlpModel& m,
                   const ValueFunction& value, const GameParams& p,
                   const GainLossConfig& cfg = {});

/// delta + V after holding the chosen feedback pair; lies between the two
/// functions above.
double paired_hold_value(const State& start, double delta, const MlpModel& m,
                         const ValueFunction& value, const GameParams& p,
                         const GainLossConfig& cfg = {});

/// Minimizer of `f` on [lo, hi] by golden-section search down to `tolerance`.
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tolerance);

/// Grid coordinate i of n on [-rho, rho], computed so that coarser grids nest
/// bit-exactly into finer ones.
double grid_coordinate(int i, int n, double rho);

struct GainLossField {
    double delta = 0.0;
    int resolution = 0;
    /// Row-major over (y index, x index); entries off the disc are unused.
    std::vector<bool> mask;
    std::vector<double> v_min;
    std::vector<double> v_max;
    std::vector<double> value;

    State cell(std::size_t index, const GameParams& p) const;
};

GainLossField compute_field(double delta, int resolution, const MlpModel& m,
                            const ValueFunction& value, const GameParams& p,
                            const GainLossConfig& cfg = {});

/// One field per delta; throws ConfigError if resolution < 11.
std::vector<GainLossField> field_sweep(const std::vector<double>& deltas, int resolution,
                                       const MlpModel& m, const ValueFunction& value,
                                       const GameParams& p, const GainLossConfig& cfg = {});

/// CSV with header `x,y,vmin,vmax,v`, one row per cell on the disc.
void write_field_csv(const GainLossField& field, const GameParams& p,
                     const std::filesystem::path& path);

}  // namespace ppg
