#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace ppg {

inline constexpr double kPi = std::numbers::pi;

/// Maps an angle onto the principal interval (-pi, pi].
double wrap_angle(double angle);

/// Wrapped difference a - b on (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

/// Physical constants of one game instance.
///
/// The evader moves with speed `evader_speed` and turns at most at
/// `evader_turn_rate`; the pursuer moves with `pursuer_speed` and can change
/// heading instantly. The game set is the closed disc of radius
/// `surveillance_radius` around the evader.
struct GameParams {
    double evader_speed = 1.5;
    double pursuer_speed = 1.0;
    double evader_turn_rate = 1.0;
    double surveillance_radius = 1.0;

    /// Throws ConfigError unless all fields are positive and the evader is
    /// strictly faster than the pursuer.
    void validate() const;
};

/// Position of the pursuer in the evader-centric frame.
struct State {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
    double dot(const State& o) const { return x * o.x + y * o.y; }

    friend State operator+(State a, State b) { return {a.x + b.x, a.y + b.y}; }
    friend State operator-(State a, State b) { return {a.x - b.x, a.y - b.y}; }
    friend State operator*(double k, State a) { return {k * a.x, k * a.y}; }
    friend bool operator==(const State&, const State&) = default;
};

/// Time derivative of a State (length/time).
using StateDerivative = State;

/// Gradient of the value function (time/length); the costate of the
/// characteristic system.
struct Costate {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
    friend bool operator==(const Costate&, const Costate&) = default;
};

inline bool in_game_set(const State& s, const GameParams& p) {
    return s.norm() <= p.surveillance_radius;
}

/// Input pair: normalized evader turn rate in [-1, 1] and pursuer heading
/// relative to the evader in (-pi, pi].
class Controls {
public:
    Controls() = default;
    /// Throws ConfigError if `evader` is outside [-1, 1] or either value is
    /// not finite; `pursuer` is wrapped.
    Controls(double evader, double pursuer);

    double evader() const { return evader_; }
    double pursuer() const { return pursuer_; }

    friend bool operator==(const Controls&, const Controls&) = default;

private:
    double evader_ = 0.0;
    double pursuer_ = 0.0;
};

struct EvaderPose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
};

struct PursuerPosition {
    double x = 0.0;
    double y = 0.0;
};

/// Both agents in the inertial frame. Headings are measured from the
/// inertial y-axis, so a heading of 0 moves along +y.
struct InertialStates {
    EvaderPose evader;
    PursuerPosition pursuer;
};

/// Relative dynamics in the evader-centric frame.
StateDerivative dynamics(const State& s, const Controls& c, const GameParams& p);

/// Rotates the pursuer offset into the evader frame.
State to_evader_frame(const InertialStates& inertial);

/// One classical Runge-Kutta step with `c` held over [0, dt].
State rk4_step(const State& s, const Controls& c, double dt, const GameParams& p);

/// Integrates over `duration` with fixed steps of at most `max_step`.
State integrate_constant(const State& s, const Controls& c, double duration, double max_step,
                         const GameParams& p);

struct Crossing {
    double fraction = 0.0;  ///< position of the root inside the step, in [0, 1]
    State point;
};

/// Radial tolerance used when locating a terminal crossing.
inline constexpr double kCrossingTolerance = 1e-9;

/// Locates where the chord from `prev` to `next` leaves the game set.
///
/// Returns nothing if `next` is still inside. The root is found by bisection
/// along the chord. Throws DegenerateCrossing if the located point is not an
/// outward crossing under `c`.
std::optional<Crossing> boundary_crossing(const State& prev, const State& next, const Controls& c,
                                          const GameParams& p);

/// Same as above, but bisects along the RK4 sub-step s(theta) =
/// rk4_step(prev, c, theta * dt) instead of the chord.
std::optional<Crossing> boundary_crossing_dense(const State& prev, const Controls& c, double dt,
                                                const GameParams& p);

/// True if `s` is on the terminal circle and the flow under `c` points out.
bool terminates_at(const State& s, const Controls& c, const GameParams& p);

}  // namespace ppg
