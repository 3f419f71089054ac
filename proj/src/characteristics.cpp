#include "ppg/characteristics.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "csv.hpp"
#include "ppg/errors.hpp"
#include "ppg/feedback.hpp"

namespace ppg {

using detail::format_double;

namespace {

constexpr double kUsableMargin = 1e-9;

struct Phase {
    State s;
    Costate l;
};

Phase operator+(const Phase& a, const Phase& b) {
    return {a.s + b.s, {a.l.x + b.l.x, a.l.y + b.l.y}};
}
Phase operator*(double k, const Phase& a) { return {k * a.s, {k * a.l.x, k * a.l.y}}; }

double pursuer_law(const Costate& l) { return std::atan2(l.x, l.y); }

// Retrograde characteristic field; the pursuer control follows the costate.
Phase retrograde_rhs(const Phase& z, double evader, const GameParams& p) {
    const Controls c(evader, pursuer_law(z.l));
    const StateDerivative f = dynamics(z.s, c, p);
    const double turn = p.evader_turn_rate * evader;
    return {{-f.x, -f.y}, {turn * z.l.y, -turn * z.l.x}};
}

Phase retrograde_step(const Phase& z, double evader, double h, const GameParams& p) {
    const Phase k1 = retrograde_rhs(z, evader, p);
    const Phase k2 = retrograde_rhs(z + (0.5 * h) * k1, evader, p);
    const Phase k3 = retrograde_rhs(z + (0.5 * h) * k2, evader, p);
    const Phase k4 = retrograde_rhs(z + h * k3, evader, p);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename ControlAt>
State rk4_varying(const State& s, double h, ControlAt&& control_at, const GameParams& p) {
    const State k1 = dynamics(s, control_at(0.0, s), p);
    const State m1 = s + (0.5 * h) * k1;
    const State k2 = dynamics(m1, control_at(0.5, m1), p);
    const State m2 = s + (0.5 * h) * k2;
    const State k3 = dynamics(m2, control_at(0.5, m2), p);
    const State e = s + h * k3;
    const State k4 = dynamics(e, control_at(1.0, e), p);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Chord fraction at which |prev + t (next - prev)| = rho.
double chord_exit_fraction(const State& prev, const State& next, double rho) {
    double lo = 0.0;
    double hi = 1.0;
    const State d = next - prev;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((prev + mid * d).norm() > rho ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

State TerminalCondition::point(const GameParams& p) const {
    return {p.surveillance_radius * std::sin(angle), p.surveillance_radius * std::cos(angle)};
}

Costate TerminalCondition::costate(const GameParams& p) const {
    const State xt = point(p);
    return {scale * xt.x / p.surveillance_radius, scale * xt.y / p.surveillance_radius};
}

double usable_angle_min(const GameParams& p) {
    return std::acos(-p.pursuer_speed / p.evader_speed);
}

TerminalCondition terminal_costate(double angle, const GameParams& p) {
    const double rho = p.surveillance_radius;
    if (!(std::cos(angle) < -p.pursuer_speed / p.evader_speed - kUsableMargin)) {
        throw NotUsable("terminal angle " + format_double(angle) +
                        " is not on the usable part of the terminal circle");
    }
    TerminalCondition tc{angle, 0.0};
    const State xt = tc.point(p);
    // Outward speed under the optimal terminal controls; the evader's turn is
    // tangential and drops out.
    const double outward = -p.pursuer_speed * rho - p.evader_speed * xt.y;
    tc.scale = -rho / outward;
    return tc;
}

Characteristic trace_characteristic(const CharacteristicSeed& seed, double dtau, double tau_max,
                                    const GameParams& p) {
    if (!(dtau > 0.0) || !(tau_max >= 0.0)) throw ConfigError("dtau must be positive");
    Characteristic out;
    out.seed = seed;
    out.dtau = dtau;
    const auto steps = static_cast<long>(std::floor(tau_max / dtau + 1e-9));
    out.points.reserve(static_cast<std::size_t>(steps) + 1);
    out.controls.reserve(static_cast<std::size_t>(steps) + 1);

    Phase z{seed.state, seed.costate};
    double evader = seed.initial_evader;
    out.points.push_back({z.s, z.l, seed.value});
    for (long k = 0; k < steps; ++k) {
        if (k > 0) {
            const double switching = z.l.x * z.s.y - z.l.y * z.s.x;
            if (std::abs(switching) > kSingularSwitching) evader = switching > 0.0 ? 1.0 : -1.0;
        }
        out.controls.emplace_back(evader, pursuer_law(z.l));
        const Phase next = retrograde_step(z, evader, dtau, p);
        if (next.s.norm() > p.surveillance_radius) {
            out.stop = StopReason::LeftGameSet;
            return out;
        }
        if (static_cast<double>(seed.side) * next.s.x < 0.0) {
            out.stop = StopReason::CrossedAxis;
            return out;
        }
        z = next;
        out.points.push_back({z.s, z.l, seed.value + static_cast<double>(k + 1) * dtau});
    }
    // Control that would be applied on the next step, so controls and points
    // have equal length.
    const double switching = z.l.x * z.s.y - z.l.y * z.s.x;
    if (std::abs(switching) > kSingularSwitching) evader = switching > 0.0 ? 1.0 : -1.0;
    out.controls.emplace_back(evader, pursuer_law(z.l));
    out.stop = StopReason::Horizon;
    return out;
}

Characteristic generate_characteristic(const TerminalCondition& tc, double dtau, double tau_max,
                                       const GameParams& p) {
    if (dtau > 1e-2) throw ConfigError("dtau must not exceed 1e-2");
    const State xt = tc.point(p);
    if (std::abs(xt.x) <= 1e-12) {
        throw SingularStall("terminal point on the y-axis: use the universal line");
    }
    const int side = xt.x > 0.0 ? 1 : -1;
    // The switching function vanishes on the circle; its time derivative
    // -c x_T v_e / rho fixes the sign just before termination.
    CharacteristicSeed seed{SeedKind::Terminal, xt, tc.costate(p), 0.0,
                            -static_cast<double>(side), side};
    return trace_characteristic(seed, dtau, tau_max, p);
}

double sliding_line_end(const GameParams& p) {
    return std::min(p.surveillance_radius, p.pursuer_speed / p.evader_turn_rate);
}

double axis_value(double y, const GameParams& p) {
    const double ve = p.evader_speed;
    const double vp = p.pursuer_speed;
    const double base = p.surveillance_radius / (ve - vp);
    if (y <= 0.0) return (p.surveillance_radius + y) / (ve - vp);
    // Sliding speed along +y is v_e - sqrt(v_p^2 - omega^2 y^2); substitute
    // omega y = v_p sin t and integrate in closed form.
    const double t = std::asin(std::min(1.0, p.evader_turn_rate * y / vp));
    const double root = std::sqrt(ve * ve - vp * vp);
    const double k = std::sqrt((ve + vp) / (ve - vp));
    return base + (-t + 2.0 * ve / root * std::atan(k * std::tan(0.5 * t))) / p.evader_turn_rate;
}

Costate axis_costate(double y, const GameParams& p) {
    const double ve = p.evader_speed;
    const double vp = p.pursuer_speed;
    if (y <= 0.0) return {0.0, 1.0 / (ve - vp)};
    const double along = std::sqrt(std::max(0.0, vp * vp - std::pow(p.evader_turn_rate * y, 2)));
    const double ly = 1.0 / (ve - along);
    return {-ly * p.evader_turn_rate * y / along, ly};
}

std::vector<CharacteristicPoint> universal_line(double dtau, const GameParams& p) {
    const double rate = p.evader_speed - p.pursuer_speed;
    const double rho = p.surveillance_radius;
    const auto n = static_cast<long>(std::floor(rho / (rate * dtau) + 1e-9));
    std::vector<CharacteristicPoint> out;
    out.reserve(static_cast<std::size_t>(n) + 2);
    const Costate l = axis_costate(-rho, p);
    for (long k = 0; k <= n; ++k) {
        const double tau = static_cast<double>(k) * dtau;
        out.push_back({{0.0, -rho + rate * tau}, l, tau});
    }
    if (out.back().state.y < 0.0) out.push_back({{0.0, 0.0}, l, rho / rate});
    return out;
}

double replay_time(const Characteristic& ch, std::size_t index, const GameParams& p) {
    if (index >= ch.points.size()) throw ConfigError("replay index out of range");
    const double rho = p.surveillance_radius;
    const double h = ch.dtau;
    State s = ch.points[index].state;
    double t = 0.0;
    for (std::size_t j = index; j > 0; --j) {
        const double evader = ch.controls[j - 1].evader();
        const double up0 = ch.controls[j].pursuer();
        const double dup = angle_diff(ch.controls[j - 1].pursuer(), up0);
        const State next = rk4_varying(
            s, h, [&](double frac, const State&) { return Controls(evader, up0 + frac * dup); }, p);
        if (next.norm() > rho) return t + h * chord_exit_fraction(s, next, rho);
        s = next;
        t += h;
    }
    // Continue to the circle: along the axis for axis seeds, with the last
    // stored control otherwise.
    const int side = ch.seed.side;
    const SeedKind kind = ch.seed.kind;
    const Controls last = ch.controls.front();
    auto continuation = [&](double, const State& st) {
        if (kind == SeedKind::Terminal) return last;
        if (st.y > 0.0) {
            const double ratio = std::clamp(p.evader_turn_rate * st.y / p.pursuer_speed, -1.0, 1.0);
            return Controls(-static_cast<double>(side), -static_cast<double>(side) * std::asin(ratio));
        }
        return Controls(0.0, 0.0);
    };
    const long max_steps = static_cast<long>(100.0 * (rho / (p.evader_speed - p.pursuer_speed)) / h);
    for (long k = 0; k < max_steps; ++k) {
        const State next = rk4_varying(s, h, continuation, p);
        if (next.norm() > rho) return t + h * chord_exit_fraction(s, next, rho);
        s = next;
        t += h;
    }
    throw Error("replay did not reach the terminal circle");
}

void DatasetConfig::validate() const {
    if (n_angles < 2) throw ConfigError("n_angles must be at least 2");
    if (n_axis_seeds < 1) throw ConfigError("n_axis_seeds must be positive");
    if (!(dtau > 0.0 && dtau <= 1e-2)) throw ConfigError("dtau must be in (0, 1e-2]");
    if (!(tau_max > 0.0)) throw ConfigError("tau_max must be positive");
    if (!(cell_size > 0.0)) throw ConfigError("cell_size must be positive");
    if (!(max_costate_scale > 0.0)) throw ConfigError("max_costate_scale must be positive");
}

std::vector<CharacteristicSeed> dataset_seeds(const GameParams& p, const DatasetConfig& cfg) {
    std::vector<CharacteristicSeed> seeds;
    const double lo = usable_angle_min(p);
    const double hi = kPi;
    if (!(lo < hi) || !std::isfinite(lo)) throw EmptyUsablePart("usable part is empty");
    for (int i = 0; i < cfg.n_angles; ++i) {
        const double angle = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / cfg.n_angles;
        const TerminalCondition tc = terminal_costate(angle, p);
        const State xt = tc.point(p);
        if (xt.x <= 1e-12 || std::abs(tc.scale) > cfg.max_costate_scale) continue;
        seeds.push_back({SeedKind::Terminal, xt, tc.costate(p), 0.0, -1.0, 1});
    }
    if (seeds.empty()) throw EmptyUsablePart("no usable terminal angles");

    const double rho = p.surveillance_radius;
    const int n = cfg.n_axis_seeds;
    for (int j = 0; j < n; ++j) {
        const double y = -rho + rho * (static_cast<double>(j) + 0.5) / n;
        seeds.push_back({SeedKind::UniversalLine, {0.0, y}, axis_costate(y, p), axis_value(y, p),
                         -1.0, 1});
    }
    const double top = sliding_line_end(p);
    for (int j = 0; j < n; ++j) {
        const double y = top * (static_cast<double>(j) + 0.5) / n;
        seeds.push_back({SeedKind::SlidingLine, {0.0, y}, axis_costate(y, p), axis_value(y, p),
                         -1.0, 1});
    }
    return seeds;
}

Dataset build_dataset(const GameParams& p, const DatasetConfig& cfg) {
    p.validate();
    cfg.validate();
    using Cell = std::pair<std::int64_t, std::int64_t>;
    auto better = [](const CharacteristicPoint& a, const CharacteristicPoint& b) {
        return std::tie(a.value, a.state.x, a.state.y) < std::tie(b.value, b.state.x, b.state.y);
    };
    std::map<Cell, CharacteristicPoint> envelope;
    for (const CharacteristicSeed& seed : dataset_seeds(p, cfg)) {
        const Characteristic ch = trace_characteristic(seed, cfg.dtau, cfg.tau_max, p);
        // Axis seeds are represented by the analytic universal line (y <= 0)
        // or lie on the non-differentiability set (y > 0).
        const std::size_t first = seed.kind == SeedKind::Terminal ? 0 : 1;
        for (std::size_t k = first; k < ch.points.size(); ++k) {
            const CharacteristicPoint& pt = ch.points[k];
            if (!(pt.state.x > 0.0)) continue;
            const Cell cell{static_cast<std::int64_t>(std::floor(pt.state.x / cfg.cell_size)),
                            static_cast<std::int64_t>(std::floor(pt.state.y / cfg.cell_size))};
            auto [it, inserted] = envelope.try_emplace(cell, pt);
            if (!inserted && better(pt, it->second)) it->second = pt;
        }
    }
    Dataset out;
    out.reserve(2 * envelope.size() + 4096);
    for (const auto& [cell, pt] : envelope) {
        out.push_back(pt);
        out.push_back({{-pt.state.x, pt.state.y}, {-pt.costate.x, pt.costate.y}, pt.value});
    }
    for (const CharacteristicPoint& pt : universal_line(cfg.dtau, p)) out.push_back(pt);
    return out;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::vector<const CharacteristicPoint*> rows;
    rows.reserve(data.size());
    for (const auto& pt : data) rows.push_back(&pt);
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        return std::tie(a->state.x, a->state.y, a->costate.x, a->costate.y, a->value) <
               std::tie(b->state.x, b->state.y, b->costate.x, b->costate.y, b->value);
    });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "x,y,dvx,dvy,v\n";
    for (const auto* pt : rows) {
        out << format_double(pt->state.x) << ',' << format_double(pt->state.y) << ','
            << format_double(pt->costate.x) << ',' << format_double(pt->costate.y) << ','
            << format_double(pt->value) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    Dataset out;
    for (const auto& r : detail::read_numeric_csv(path, "x,y,dvx,dvy,v")) {
        out.push_back({{r[0], r[1]}, {r[2], r[3]}, r[4]});
    }
    return out;
}

}  // namespace ppg
