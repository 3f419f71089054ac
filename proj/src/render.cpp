#include "ppg/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ppg/errors.hpp"
#include "ppg/gain_loss.hpp"

namespace ppg {

namespace {

constexpr double kPlot = 480.0;
constexpr double kMargin = 20.0;
constexpr double kBarHeight = 14.0;

// Viridis sampled at five stops.
constexpr std::array<std::array<double, 3>, 5> kStops{{
    {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};

std::string colour(double t) {
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * (kStops.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), kStops.size() - 2);
    const double f = t - static_cast<double>(i);
    std::array<char, 8> buf{};
    const auto c = [&](int k) {
        return static_cast<int>(std::lround(kStops[i][k] + f * (kStops[i + 1][k] - kStops[i][k])));
    };
    std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", c(0), c(1), c(2));
    return buf.data();
}

std::string num(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.2f", v);
    return buf.data();
}

std::string label(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.4g", v);
    return buf.data();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

ModelField parse_model_field(std::string_view name) {
    if (name == "value") return ModelField::Value;
    if (name == "evader") return ModelField::Evader;
    if (name == "pursuer") return ModelField::Pursuer;
    throw ConfigError("unknown field '" + std::string(name) + "'");
}

Heatmap model_heatmap(const MlpModel& m, ModelField field, int resolution, const GameParams& p) {
    if (resolution < 2) throw ConfigError("heatmap resolution must be at least 2");
    Heatmap h;
    h.resolution = resolution;
    const auto cells = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    h.values.assign(cells, 0.0);
    h.mask.assign(cells, false);
    double top = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const State s{grid_coordinate(static_cast<int>(i % resolution), resolution, p.surveillance_radius),
                      grid_coordinate(static_cast<int>(i / resolution), resolution, p.surveillance_radius)};
        if (!in_game_set(s, p)) continue;
        h.mask[i] = true;
        const ModelOutput out = forward(m, s);
        switch (field) {
            case ModelField::Value: h.values[i] = std::max(0.0, out.value); break;
            case ModelField::Evader: h.values[i] = out.evader; break;
            case ModelField::Pursuer: h.values[i] = out.pursuer; break;
        }
        top = std::max(top, h.values[i]);
    }
    switch (field) {
        case ModelField::Value:
            h.lo = 0.0;
            h.hi = top > 0.0 ? top : 1.0;
            h.title = "value";
            break;
        case ModelField::Evader:
            h.lo = -1.0;
            h.hi = 1.0;
            h.title = "evader feedback";
            break;
        case ModelField::Pursuer:
            h.lo = -kPi;
            h.hi = kPi;
            h.title = "pursuer feedback";
            break;
    }
    return h;
}

Heatmap grid_heatmap(const std::vector<std::array<double, 3>>& samples, int resolution,
                     const GameParams& p, std::string title) {
    if (resolution < 2) throw ConfigError("heatmap resolution must be at least 2");
    Heatmap h;
    h.resolution = resolution;
    h.title = std::move(title);
    const auto cells = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    h.values.assign(cells, 0.0);
    h.mask.assign(cells, false);
    const double rho = p.surveillance_radius;
    const double spacing = 2.0 * rho / (resolution - 1);
    bool any = false;
    for (const auto& [x, y, v] : samples) {
        const long i = std::lround((x + rho) / spacing);
        const long j = std::lround((y + rho) / spacing);
        if (i < 0 || j < 0 || i >= resolution || j >= resolution) {
            throw FormatError("sample (" + label(x) + ", " + label(y) + ") is off the grid");
        }
        const auto k = static_cast<std::size_t>(j * resolution + i);
        h.values[k] = v;
        h.mask[k] = true;
        h.lo = any ? std::min(h.lo, v) : v;
        h.hi = any ? std::max(h.hi, v) : v;
        any = true;
    }
    if (!any) throw FormatError("no samples to draw");
    if (h.hi <= h.lo) h.hi = h.lo + 1.0;
    return h;
}

std::string render_svg(const Heatmap& heatmap, const std::vector<Polyline>& overlays,
                       const GameParams& p) {
    const double rho = p.surveillance_radius;
    const double scale = kPlot / (2.0 * rho);
    const auto px = [&](double x) { return kMargin + (x + rho) * scale; };
    const auto py = [&](double y) { return kMargin + (rho - y) * scale; };
    const double width = kPlot + 2.0 * kMargin;
    const double height = kPlot + 3.0 * kMargin + kBarHeight + 16.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const int n = heatmap.resolution;
    if (n > 0) {
        const double cell = kPlot / n;
        svg << "<g shape-rendering=\"crispEdges\">\n";
        for (std::size_t k = 0; k < heatmap.values.size(); ++k) {
            if (!heatmap.mask[k]) continue;
            const auto i = static_cast<int>(k % static_cast<std::size_t>(n));
            const auto j = static_cast<int>(k / static_cast<std::size_t>(n));
            const double t = (heatmap.values[k] - heatmap.lo) / (heatmap.hi - heatmap.lo);
            svg << "<rect x=\"" << num(kMargin + i * cell) << "\" y=\""
                << num(kMargin + (n - 1 - j) * cell) << "\" width=\"" << num(cell + 0.05)
                << "\" height=\"" << num(cell + 0.05) << "\" fill=\"" << colour(t) << "\"/>\n";
        }
        svg << "</g>\n";
    }
    svg << "<circle cx=\"" << num(px(0.0)) << "\" cy=\"" << num(py(0.0)) << "\" r=\""
        << num(rho * scale) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg << "<line x1=\"" << num(px(0.0)) << "\" y1=\"" << num(py(rho)) << "\" x2=\"" << num(px(0.0))
        << "\" y2=\"" << num(py(-rho)) << "\" stroke=\"grey\" stroke-dasharray=\"4 4\"/>\n";
    static constexpr std::array<const char*, 6> kLineColours{"#d62728", "#1f77b4", "#ff7f0e",
                                                             "#2ca02c", "#9467bd", "#8c564b"};
    for (std::size_t k = 0; k < overlays.size(); ++k) {
        const char* stroke = kLineColours[k % kLineColours.size()];
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (const State& s : overlays[k].points) svg << num(px(s.x)) << ',' << num(py(s.y)) << ' ';
        svg << "\"/>\n";
        svg << "<text x=\"" << num(kMargin + 4) << "\" y=\"" << num(kMargin + 14 + 14.0 * k)
            << "\" font-size=\"12\" fill=\"" << stroke << "\">" << escape(overlays[k].label)
            << "</text>\n";
    }
    const double bar_y = 2.0 * kMargin + kPlot;
    if (n > 0) {
        constexpr int kBarSteps = 64;
        for (int b = 0; b < kBarSteps; ++b) {
            svg << "<rect x=\"" << num(kMargin + kPlot * b / kBarSteps) << "\" y=\"" << num(bar_y)
                << "\" width=\"" << num(kPlot / kBarSteps + 0.05) << "\" height=\"" << num(kBarHeight)
                << "\" fill=\"" << colour((b + 0.5) / kBarSteps) << "\"/>\n";
        }
        svg << "<text x=\"" << num(kMargin) << "\" y=\"" << num(bar_y + kBarHeight + 14)
            << "\" font-size=\"12\">" << label(heatmap.lo) << "</text>\n";
        svg << "<text x=\"" << num(kMargin + kPlot) << "\" y=\"" << num(bar_y + kBarHeight + 14)
            << "\" font-size=\"12\" text-anchor=\"end\">" << label(heatmap.hi) << "</text>\n";
    }
    svg << "<text x=\"" << num(width / 2) << "\" y=\"" << num(bar_y + kBarHeight + 14)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(heatmap.title) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ppg
