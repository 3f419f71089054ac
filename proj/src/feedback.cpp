#include "ppg/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppg/errors.hpp"
#include "ppg/value_model.hpp"

namespace ppg {

EvaderFeedback evader_feedback(const Costate& grad, const State& s) {
    const double switching = grad.x * s.y - grad.y * s.x;
    if (std::abs(switching) <= kSingularSwitching) return {0.0, true};
    return {switching > 0.0 ? 1.0 : -1.0, false};
}

double pursuer_feedback(const Costate& grad) {
    if (grad.x == 0.0 && grad.y == 0.0) throw ZeroGradient("pursuer feedback of a zero gradient");
    return wrap_angle(std::atan2(grad.x, grad.y));
}

Controls optimal_controls(const Costate& grad, const State& s) {
    return {evader_feedback(grad, s).control, pursuer_feedback(grad)};
}

double hamiltonian(const State& s, const Costate& grad, const Controls& c, const GameParams& p) {
    const StateDerivative f = dynamics(s, c, p);
    return grad.x * f.x + grad.y * f.y + 1.0;
}

SelectionMode parse_selection_mode(std::string_view name) {
    if (name == "network-direct") return SelectionMode::NetworkDirect;
    if (name == "left-limit") return SelectionMode::LeftLimit;
    if (name == "right-limit") return SelectionMode::RightLimit;
    if (name == "analytic-from-gradient") return SelectionMode::AnalyticFromGradient;
    throw ConfigError("unknown selection mode '" + std::string(name) + "'");
}

std::string_view to_string(SelectionMode mode) {
    switch (mode) {
        case SelectionMode::NetworkDirect: return "network-direct";
        case SelectionMode::LeftLimit: return "left-limit";
        case SelectionMode::RightLimit: return "right-limit";
        case SelectionMode::AnalyticFromGradient: return "analytic-from-gradient";
    }
    return "network-direct";
}

void SelectionPolicy::validate() const {
    if (!(axis_epsilon > 0.0) || !std::isfinite(axis_epsilon)) {
        throw ConfigError("axis epsilon must be positive");
    }
}

namespace {

Controls source_controls(const State& s, const MlpModel& model, bool analytic) {
    const ModelOutput out = forward(model, s);
    if (!analytic) return {std::clamp(out.evader, -1.0, 1.0), out.pursuer};
    const double up = out.gradient.x == 0.0 && out.gradient.y == 0.0
                          ? out.pursuer
                          : pursuer_feedback(out.gradient);
    return {evader_feedback(out.gradient, s).control, up};
}

}  // namespace

ControlSelection select_controls(const State& s, const MlpModel& model,
                                 const SelectionPolicy& policy) {
    const bool analytic = policy.mode == SelectionMode::AnalyticFromGradient;
    ControlSelection sel;
    if (std::abs(s.x) > policy.axis_epsilon) {
        sel.chosen = source_controls(s, model, analytic);
        sel.candidates = {sel.chosen};
        return sel;
    }
    const double eps = policy.axis_epsilon;
    sel.candidates = {source_controls({-eps, s.y}, model, analytic),
                      source_controls({eps, s.y}, model, analytic)};
    bool left = false;
    switch (policy.mode) {
        case SelectionMode::LeftLimit: left = true; break;
        case SelectionMode::RightLimit: left = false; break;
        default: left = s.x < 0.0; break;
    }
    sel.chosen = sel.candidates[left ? 0 : 1];
    return sel;
}

}  // namespace ppg
