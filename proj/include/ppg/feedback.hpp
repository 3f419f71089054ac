#pragma once

#include <string_view>
#include <vector>

#include "ppg/game_core.hpp"

namespace ppg {

class MlpModel;

/// Switching values at or below this magnitude are reported as singular.
inline constexpr double kSingularSwitching = 1e-12;

struct EvaderFeedback {
    double control = 0.0;  ///< -1, 0 or +1
    bool singular = false;
};

/// u_e* = sign(grad_x * y - grad_y * x). A vanishing switching value is
/// flagged singular and reported as 0.
EvaderFeedback evader_feedback(const Costate& grad, const State& s);

/// u_p* = atan2(grad_x, grad_y) on (-pi, pi]. Throws ZeroGradient for a zero
/// gradient.
double pursuer_feedback(const Costate& grad);

/// Both analytic laws; a singular evader control maps to 0.
Controls optimal_controls(const Costate& grad, const State& s);

/// H = grad^T f + 1.
double hamiltonian(const State& s, const Costate& grad, const Controls& c, const GameParams& p);

enum class SelectionMode { NetworkDirect, LeftLimit, RightLimit, AnalyticFromGradient };

SelectionMode parse_selection_mode(std::string_view name);
std::string_view to_string(SelectionMode mode);

/// Realizes one element of the set-valued feedback near the y-axis.
///
/// Within `axis_epsilon` of the y-axis the candidates are the one-sided
/// limits evaluated at (-eps, y) and (+eps, y). LeftLimit and RightLimit pick
/// the respective side; the two source modes pick the side the state lies on
/// (right when x == 0). Away from the axis the candidate set is a singleton
/// and LeftLimit/RightLimit use the network heads.
struct SelectionPolicy {
    SelectionMode mode = SelectionMode::NetworkDirect;
    double axis_epsilon = 1e-3;

    void validate() const;
};

struct ControlSelection {
    Controls chosen;
    std::vector<Controls> candidates;  ///< one or two entries; `chosen` is among them
};

ControlSelection select_controls(const State& s, const MlpModel& model,
                                 const SelectionPolicy& policy);

}  // namespace ppg
