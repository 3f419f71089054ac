#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>

#include "ppg/errors.hpp"
#include "ppg/gain_loss.hpp"
#include "ppg/render.hpp"
#include "support.hpp"

using namespace ppg;
using ppg::test::kParams;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("value heatmap spans [0, max] and masks the outside of the disc") {
    const MlpModel m = MlpModel::random(8);
    const int res = 31;
    const Heatmap h = model_heatmap(m, ModelField::Value, res, kParams);
    double top = 0.0;
    std::size_t inside = 0;
    for (int j = 0; j < res; ++j) {
        for (int i = 0; i < res; ++i) {
            const State s{grid_coordinate(i, res, 1.0), grid_coordinate(j, res, 1.0)};
            const std::size_t k = static_cast<std::size_t>(j * res + i);
            CHECK(h.mask[k] == (s.norm() <= 1.0));
            if (!h.mask[k]) continue;
            ++inside;
            top = std::max(top, std::max(0.0, forward(m, s).value));
        }
    }
    CHECK(h.lo == 0.0);
    CHECK(h.hi == (top > 0.0 ? top : 1.0));
    const std::string svg = render_svg(h, {}, kParams);
    CHECK(svg.rfind("<svg", 0) == 0);
    // One rect per masked cell, 64 colour-bar swatches and the background.
    CHECK(count(svg, "<rect") == inside + 64 + 1);
    CHECK(svg.find("<circle") != std::string::npos);
}

TEST_CASE("feedback heatmaps use fixed scales") {
    const MlpModel m = MlpModel::random(9);
    const Heatmap e = model_heatmap(m, ModelField::Evader, 11, kParams);
    CHECK(e.lo == -1.0);
    CHECK(e.hi == 1.0);
    const Heatmap p = model_heatmap(m, ModelField::Pursuer, 11, kParams);
    CHECK(p.lo == -kPi);
    CHECK(p.hi == kPi);
    CHECK_THROWS_AS(parse_model_field("speed"), ConfigError);
}

TEST_CASE("grid heatmap from samples") {
    const std::vector<std::array<double, 3>> samples{{0.0, 0.0, 2.0}, {0.5, 0.0, 3.0}, {0.0, -1.0, 1.0}};
    const Heatmap h = grid_heatmap(samples, 5, kParams, "v");
    CHECK(h.lo == 1.0);
    CHECK(h.hi == 3.0);
    CHECK(h.values[2 * 5 + 2] == 2.0);
    CHECK(h.values[2 * 5 + 3] == 3.0);
    CHECK(h.values[0 * 5 + 2] == 1.0);
    CHECK(std::count(h.mask.begin(), h.mask.end(), true) == 3);
    CHECK_THROWS_AS(grid_heatmap({{3.0, 0.0, 1.0}}, 5, kParams, "v"), FormatError);
}

TEST_CASE("trajectory overlay") {
    const Polyline line{{{0, 1}, {0.1, 0.5}, {0, -1}}, "a<b"};
    const std::string svg = render_svg({}, {line}, kParams);
    CHECK(count(svg, "<polyline") == 1);
    CHECK(svg.find("a&lt;b") != std::string::npos);
}
