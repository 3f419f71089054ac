#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ppg/game_core.hpp"

namespace ppg {

/// One sample of the open-loop optimal solution: state, value gradient and
/// value (equal to the elapsed retrograde time plus the seed value).
struct CharacteristicPoint {
    State state;
    Costate costate;
    double value = 0.0;

    friend bool operator==(const CharacteristicPoint&, const CharacteristicPoint&) = default;
};

using Dataset = std::vector<CharacteristicPoint>;

/// Terminal manifold point xi_T = rho * (sin angle, cos angle) with costate
/// `scale * xi_T / rho`.
struct TerminalCondition {
    double angle = 0.0;
    double scale = 0.0;

    State point(const GameParams& p) const;
    Costate costate(const GameParams& p) const;
};

/// Terminal condition satisfying H = 0 on the usable part. Throws NotUsable
/// unless cos(angle) < -v_p / v_e.
TerminalCondition terminal_costate(double angle, const GameParams& p);

/// Smallest terminal angle (measured from +y) of the usable part with x_T >= 0.
double usable_angle_min(const GameParams& p);

enum class SeedKind { Terminal, UniversalLine, SlidingLine };

/// Initial data of a retrograde characteristic.
struct CharacteristicSeed {
    SeedKind kind = SeedKind::Terminal;
    State state;
    Costate costate;
    double value = 0.0;
    double initial_evader = 0.0;  ///< u_e on the first retrograde step
    int side = 1;                 ///< half-plane the branch must stay in (sign of x)
};

enum class StopReason { Horizon, LeftGameSet, CrossedAxis };

struct Characteristic {
    CharacteristicSeed seed;
    std::vector<CharacteristicPoint> points;  ///< increasing value, points[0] is the seed
    /// controls[k]: the evader control held on the retrograde step leaving
    /// points[k], and the pursuer feedback at points[k].
    std::vector<Controls> controls;
    double dtau = 0.0;
    StopReason stop = StopReason::Horizon;
};

/// Integrates the state/costate system backwards in time from `seed`.
///
/// The evader control is bang-bang, re-evaluated from the switching function
/// at every step start (the seed's `initial_evader` is used on the first
/// step); the pursuer control follows the costate continuously. Stops at
/// `tau_max`, when the state leaves the game set, or when x changes sign
/// relative to `seed.side`. Points beyond a stop are not stored.
Characteristic trace_characteristic(const CharacteristicSeed& seed, double dtau, double tau_max,
                                    const GameParams& p);

/// Characteristic emanating from a terminal condition. The evader control at
/// the terminal point is -sign(x_T). Throws SingularStall for x_T = 0, which
/// lies on the universal line.
Characteristic generate_characteristic(const TerminalCondition& tc, double dtau, double tau_max,
                                       const GameParams& p);

/// Value on the y-axis inside the game set: linear on the universal line
/// (y <= 0) and the sliding-line integral for y > 0.
double axis_value(double y, const GameParams& p);

/// Right-hand limit of the value gradient on the y-axis.
Costate axis_costate(double y, const GameParams& p);

/// Largest y for which the pursuer can hold the sliding line.
double sliding_line_end(const GameParams& p);

/// Analytic universal-line samples (0, -rho + (v_e - v_p) tau) for
/// tau = 0, dtau, ... up to the origin.
std::vector<CharacteristicPoint> universal_line(double dtau, const GameParams& p);

/// Forward time from `points[index]` to the terminal circle when replaying
/// the stored control sequence (pursuer control interpolated linearly in
/// time), continued along the axis for axis seeds.
double replay_time(const Characteristic& ch, std::size_t index, const GameParams& p);

struct DatasetConfig {
    int n_angles = 720;      ///< terminal angles on the usable part with x_T >= 0
    int n_axis_seeds = 1000; ///< tributary seeds per axis segment
    double dtau = 1e-3;
    double tau_max = 6.0;
    double cell_size = 0.02;
    /// Terminal angles whose costate scale exceeds this are skipped. The
    /// scale diverges at the ends of the usable part.
    double max_costate_scale = 20.0;

    void validate() const;
};

/// Every seed of the x >= 0 half used by build_dataset, in a fixed order.
std::vector<CharacteristicSeed> dataset_seeds(const GameParams& p, const DatasetConfig& cfg);

/// Union of all characteristics of the x >= 0 half reduced to the minimal-V
/// point per grid cell, their mirror images, and the universal line.
Dataset build_dataset(const GameParams& p, const DatasetConfig& cfg);

/// CSV with header `x,y,dvx,dvy,v`, rows sorted by (x, y).
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace ppg
