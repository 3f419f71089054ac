#include "ppg/game_core.hpp"

#include <string>

#include "ppg/errors.hpp"

namespace ppg {

double wrap_angle(double angle) {
    double r = std::remainder(angle, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

void GameParams::validate() const {
    if (!(evader_speed > 0.0 && pursuer_speed > 0.0 && evader_turn_rate > 0.0 &&
          surveillance_radius > 0.0)) {
        throw ConfigError("game parameters must be strictly positive");
    }
    if (!(pursuer_speed < evader_speed)) {
        throw ConfigError("pursuer speed must be smaller than evader speed");
    }
}

Controls::Controls(double evader, double pursuer) {
    if (!std::isfinite(evader) || !std::isfinite(pursuer)) {
        throw ConfigError("controls must be finite");
    }
    if (evader < -1.0 || evader > 1.0) {
        throw ConfigError("evader control " + std::to_string(evader) + " outside [-1, 1]");
    }
    evader_ = evader;
    pursuer_ = wrap_angle(pursuer);
}

StateDerivative dynamics(const State& s, const Controls& c, const GameParams& p) {
    const double turn = p.evader_turn_rate * c.evader();
    return {-turn * s.y + p.pursuer_speed * std::sin(c.pursuer()),
            turn * s.x - p.evader_speed + p.pursuer_speed * std::cos(c.pursuer())};
}

State to_evader_frame(const InertialStates& inertial) {
    const double dx = inertial.pursuer.x - inertial.evader.x;
    const double dy = inertial.pursuer.y - inertial.evader.y;
    const double c = std::cos(inertial.evader.heading);
    const double s = std::sin(inertial.evader.heading);
    return {c * dx - s * dy, s * dx + c * dy};
}

State rk4_step(const State& s, const Controls& c, double dt, const GameParams& p) {
    const State k1 = dynamics(s, c, p);
    const State k2 = dynamics(s + (0.5 * dt) * k1, c, p);
    const State k3 = dynamics(s + (0.5 * dt) * k2, c, p);
    const State k4 = dynamics(s + dt * k3, c, p);
    return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

State integrate_constant(const State& s, const Controls& c, double duration, double max_step,
                         const GameParams& p) {
    if (duration <= 0.0) return s;
    const auto n = static_cast<long>(std::ceil(duration / max_step - 1e-9));
    const double h = duration / static_cast<double>(n);
    State out = s;
    for (long i = 0; i < n; ++i) out = rk4_step(out, c, h, p);
    return out;
}

bool terminates_at(const State& s, const Controls& c, const GameParams& p) {
    return std::abs(s.norm() - p.surveillance_radius) <= kCrossingTolerance &&
           dynamics(s, c, p).dot(s) > 0.0;
}

namespace {

template <typename Path>
Crossing bisect_exit(Path&& path, const Controls& c, const GameParams& p) {
    const double rho = p.surveillance_radius;
    double lo = 0.0;
    double hi = 1.0;
    State lo_pt = path(0.0);
    State hi_pt = path(1.0);
    for (int it = 0; it < 200; ++it) {
        if (hi_pt.norm() - rho <= 1e-13 || hi - lo <= 1e-17) break;
        const double mid = 0.5 * (lo + hi);
        const State m = path(mid);
        if (m.norm() > rho) {
            hi = mid;
            hi_pt = m;
        } else {
            lo = mid;
            lo_pt = m;
        }
    }
    // Prefer the side closer to the circle.
    Crossing out = std::abs(hi_pt.norm() - rho) <= std::abs(lo_pt.norm() - rho)
                       ? Crossing{hi, hi_pt}
                       : Crossing{lo, lo_pt};
    if (std::abs(out.point.norm() - rho) > kCrossingTolerance) {
        throw DegenerateCrossing("crossing could not be located to tolerance");
    }
    if (!(dynamics(out.point, c, p).dot(out.point) > 0.0)) {
        throw DegenerateCrossing("boundary root is not an outward crossing; reduce the step");
    }
    return out;
}

}  // namespace

std::optional<Crossing> boundary_crossing(const State& prev, const State& next, const Controls& c,
                                          const GameParams& p) {
    if (next.norm() <= p.surveillance_radius) return std::nullopt;
    const State d = next - prev;
    return bisect_exit([&](double t) { return prev + t * d; }, c, p);
}

std::optional<Crossing> boundary_crossing_dense(const State& prev, const Controls& c, double dt,
                                                const GameParams& p) {
    const State next = rk4_step(prev, c, dt, p);
    if (next.norm() <= p.surveillance_radius) return std::nullopt;
    return bisect_exit([&](double t) { return t == 1.0 ? next : rk4_step(prev, c, t * dt, p); },
                       c, p);
}

}  // namespace ppg
