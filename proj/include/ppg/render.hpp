#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ppg/game_core.hpp"
#include "ppg/value_model.hpp"

namespace ppg {

/// Square grid over [-rho, rho]^2, row-major over (y, x); masked cells are
/// drawn, the rest left blank.
struct Heatmap {
    int resolution = 0;
    std::vector<double> values;
    std::vector<bool> mask;
    double lo = 0.0;  ///< colour scale bounds
    double hi = 1.0;
    std::string title;
};

enum class ModelField { Value, Evader, Pursuer };

ModelField parse_model_field(std::string_view name);

/// Samples one network output on the disc. The colour scale is [0, max] for
/// the value, [-1, 1] for the evader and [-pi, pi] for the pursuer.
Heatmap model_heatmap(const MlpModel& m, ModelField field, int resolution, const GameParams& p);

/// Builds a heatmap from scattered (x, y, value) samples that lie on a
/// regular grid of the given resolution; the colour scale spans the data.
Heatmap grid_heatmap(const std::vector<std::array<double, 3>>& samples, int resolution,
                     const GameParams& p, std::string title);

struct Polyline {
    std::vector<State> points;
    std::string label;
};

/// Heatmap (optional: resolution 0 draws none), terminal circle and overlays.
std::string render_svg(const Heatmap& heatmap, const std::vector<Polyline>& overlays,
                       const GameParams& p);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ppg
