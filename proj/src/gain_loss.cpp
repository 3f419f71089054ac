#include "ppg/gain_loss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "csv.hpp"
#include "ppg/errors.hpp"

namespace ppg {

double value_eval(const State& s, const MlpModel& m, const GameParams& p) {
    if (!in_game_set(s, p)) return 0.0;
    return std::max(0.0, forward(m, s).value);
}

ValueFunction model_value(const MlpModel& m, const GameParams& p) {
    return [&m, p](const State& s) { return value_eval(s, m, p); };
}

NearestNeighbourValue::NearestNeighbourValue(Dataset data, const GameParams& p, double bucket)
    : data_(std::move(data)), params_(p), bucket_(bucket) {
    if (data_.empty()) throw ConfigError("nearest-neighbour value needs a non-empty data set");
    if (!(bucket_ > 0.0)) throw ConfigError("bucket size must be positive");
    buckets_per_side_ = static_cast<long>(std::ceil(2.0 * p.surveillance_radius / bucket_)) + 1;
    buckets_.resize(static_cast<std::size_t>(buckets_per_side_ * buckets_per_side_));
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const State& s = data_[i].state;
        const auto ix = static_cast<long>(std::floor((s.x + p.surveillance_radius) / bucket_));
        const auto iy = static_cast<long>(std::floor((s.y + p.surveillance_radius) / bucket_));
        buckets_[bucket_index(ix, iy)].push_back(i);
    }
}

std::size_t NearestNeighbourValue::bucket_index(long ix, long iy) const {
    ix = std::clamp(ix, 0L, buckets_per_side_ - 1);
    iy = std::clamp(iy, 0L, buckets_per_side_ - 1);
    return static_cast<std::size_t>(iy * buckets_per_side_ + ix);
}

double NearestNeighbourValue::operator()(const State& s) const {
    if (!in_game_set(s, params_)) return 0.0;
    const double rho = params_.surveillance_radius;
    const auto cx = static_cast<long>(std::floor((s.x + rho) / bucket_));
    const auto cy = static_cast<long>(std::floor((s.y + rho) / bucket_));
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (long ring = 0; ring <= buckets_per_side_; ++ring) {
        // Every point outside the searched square is at least this far away.
        const double reach = static_cast<double>(ring - 1) * bucket_;
        if (ring > 0 && reach > 0.0 && reach * reach > best) break;
        for (long iy = cy - ring; iy <= cy + ring; ++iy) {
            for (long ix = cx - ring; ix <= cx + ring; ++ix) {
                if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
                if (ix < 0 || iy < 0 || ix >= buckets_per_side_ || iy >= buckets_per_side_) continue;
                for (std::size_t k : buckets_[bucket_index(ix, iy)]) {
                    const State d = data_[k].state - s;
                    const double dist = d.dot(d);
                    if (dist < best || (dist == best && k < best_index)) {
                        best = dist;
                        best_index = k;
                    }
                }
            }
        }
    }
    return data_[best_index].value;
}

void GainLossConfig::validate() const {
    if (evader_grid < 2) throw ConfigError("evader grid needs at least 2 points");
    if (pursuer_grid < 3) throw ConfigError("pursuer grid needs at least 3 points");
    if (pursuer_refine < 1) throw ConfigError("pursuer refinement count must be positive");
    if (!(golden_tolerance > 0.0)) throw ConfigError("golden-section tolerance must be positive");
    policy.validate();
}

std::optional<State> hold_flow(const State& start, const Controls& c, double duration,
                               const GameParams& p) {
    if (duration <= 0.0) return start;
    const double max_step = std::min(1e-3, duration / 10.0);
    const auto steps = static_cast<long>(std::ceil(duration / max_step - 1e-9));
    const double h = duration / static_cast<double>(steps);
    State s = start;
    for (long k = 0; k < steps; ++k) {
        s = rk4_step(s, c, h, p);
        if (s.norm() > p.surveillance_radius) return std::nullopt;
    }
    return s;
}

double hold_value(const State& start, const Controls& c, double duration,
                  const ValueFunction& value, const GameParams& p) {
    const auto end = hold_flow(start, c, duration, p);
    return duration + (end ? value(*end) : 0.0);
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tolerance) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tolerance) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

namespace {

std::vector<double> evader_candidates(const ControlSelection& sel, const GainLossConfig& cfg) {
    std::vector<double> out;
    for (const Controls& c : sel.candidates) {
        // The analytic source reports a singular switching value as 0.
        if (cfg.policy.mode == SelectionMode::AnalyticFromGradient && c.evader() == 0.0) {
            out.push_back(-1.0);
            out.push_back(1.0);
        } else {
            out.push_back(c.evader());
        }
    }
    return out;
}

}  // namespace

double v_min_delta(const State& start, double delta, const MlpModel& m,
                   const ValueFunction& value, const GameParams& p,
                   const GainLossConfig& cfg) {
    cfg.validate();
    if (!(delta > 0.0)) throw ConfigError("hold duration must be positive");
    const ControlSelection sel = select_controls(start, m, cfg.policy);
    double best = std::numeric_limits<double>::infinity();
    for (const Controls& cand : sel.candidates) {
        const double up = cand.pursuer();
        auto g = [&](double ue) {
            return hold_value(start, Controls(std::clamp(ue, -1.0, 1.0), up), delta, value, p);
        };
        best = std::min(best, g(cand.evader()));
        const int n = cfg.evader_grid;
        int best_k = 0;
        double grid_best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            const double v = g(-1.0 + 2.0 * k / (n - 1));
            if (v < grid_best) {
                grid_best = v;
                best_k = k;
            }
        }
        const double lo = -1.0 + 2.0 * std::max(best_k - 1, 0) / (n - 1);
        const double hi = -1.0 + 2.0 * std::min(best_k + 1, n - 1) / (n - 1);
        const double refined = g(golden_section_min(g, lo, hi, cfg.golden_tolerance));
        best = std::min({best, grid_best, refined});
    }
    return best;
}

double v_max_delta(const State& start, double delta, const MlpModel& m,
                   const ValueFunction& value, const GameParams& p,
                   const GainLossConfig& cfg) {
    cfg.validate();
    if (!(delta > 0.0)) throw ConfigError("hold duration must be positive");
    const ControlSelection sel = select_controls(start, m, cfg.policy);
    const int n = cfg.pursuer_grid;
    const double step = 2.0 * kPi / n;
    double best = -std::numeric_limits<double>::infinity();
    for (const Controls& c : sel.candidates) best = std::max(best, hold_value(start, c, delta, value, p));
    std::vector<double> values(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    const int refine = std::min(cfg.pursuer_refine, n);
    for (double ue : evader_candidates(sel, cfg)) {
        auto h = [&](double up) { return hold_value(start, Controls(ue, up), delta, value, p); };
        for (int k = 0; k < n; ++k) values[static_cast<std::size_t>(k)] = h(-kPi + step * (k + 1));
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + refine, order.end(), [&](int a, int b) {
            const double va = values[static_cast<std::size_t>(a)];
            const double vb = values[static_cast<std::size_t>(b)];
            return va > vb || (va == vb && a < b);
        });
        best = std::max(best, values[static_cast<std::size_t>(order[0])]);
        auto neg = [&](double up) { return -h(up); };
        for (int r = 0; r < refine; ++r) {
            const double centre = -kPi + step * (order[static_cast<std::size_t>(r)] + 1);
            best = std::max(best, h(golden_section_min(neg, centre - step, centre + step,
                                                       cfg.golden_tolerance)));
        }
    }
    return best;
}

double paired_hold_value(const State& start, double delta, const MlpModel& m,
                         const ValueFunction& value, const GameParams& p,
                         const GainLossConfig& cfg) {
    const Controls c = select_controls(start, m, cfg.policy).chosen;
    return hold_value(start, c, delta, value, p);
}

double grid_coordinate(int i, int n, double rho) {
    return rho * (static_cast<double>(2 * i - (n - 1)) / static_cast<double>(n - 1));
}

State GainLossField::cell(std::size_t index, const GameParams& p) const {
    const auto n = static_cast<std::size_t>(resolution);
    return {grid_coordinate(static_cast<int>(index % n), resolution, p.surveillance_radius),
            grid_coordinate(static_cast<int>(index / n), resolution, p.surveillance_radius)};
}

GainLossField compute_field(double delta, int resolution, const MlpModel& m,
                            const ValueFunction& value, const GameParams& p,
                            const GainLossConfig& cfg) {
    if (resolution < 11) throw ConfigError("field resolution must be at least 11");
    GainLossField field;
    field.delta = delta;
    field.resolution = resolution;
    const auto cells = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    field.mask.assign(cells, false);
    field.v_min.assign(cells, 0.0);
    field.v_max.assign(cells, 0.0);
    field.value.assign(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        const State s = field.cell(i, p);
        if (!in_game_set(s, p)) continue;
        field.mask[i] = true;
        field.v_min[i] = v_min_delta(s, delta, m, value, p, cfg);
        field.v_max[i] = v_max_delta(s, delta, m, value, p, cfg);
        field.value[i] = value(s);
    }
    return field;
}

std::vector<GainLossField> field_sweep(const std::vector<double>& deltas, int resolution,
                                       const MlpModel& m, const ValueFunction& value,
                                       const GameParams& p, const GainLossConfig& cfg) {
    if (resolution < 11) throw ConfigError("field resolution must be at least 11");
    std::vector<GainLossField> out;
    for (double delta : deltas) out.push_back(compute_field(delta, resolution, m, value, p, cfg));
    return out;
}

void write_field_csv(const GainLossField& field, const GameParams& p,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "x,y,vmin,vmax,v\n";
    for (std::size_t i = 0; i < field.mask.size(); ++i) {
        if (!field.mask[i]) continue;
        const State s = field.cell(i, p);
        out << detail::format_double(s.x) << ',' << detail::format_double(s.y) << ','
            << detail::format_double(field.v_min[i]) << ',' << detail::format_double(field.v_max[i])
            << ',' << detail::format_double(field.value[i]) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ppg
