#include "doctest.h"

#include <cmath>
#include <numbers>

#include "recovery/hazard.hpp"

using namespace recovery;

namespace {

CommunityModel line_of_buildings(const std::vector<Point>& points) {
    CommunityModel m;
    m.age_fractions = {0.3, 0.6, 0.1};
    m.cells = {GridCell{0, {0.0, 0.0}, {}}};
    for (std::uint32_t i = 0; i < points.size(); ++i) {
        m.buildings.push_back(Building{i, 0, points[i], {0, 1, 0}, true, 0});
        m.cells[0].building_ids.push_back(i);
    }
    m.total_population = static_cast<std::int64_t>(points.size());
    return m;
}

} // namespace

TEST_SUITE("hazard") {

TEST_CASE("median_ln_im worked values") {
    CHECK(median_ln_im(GmpeParams{0, 0, 0, 1, 0, 0}, 6.5, 17.0) == 0.0);
    CHECK(median_ln_im(GmpeParams{0, 1, 0, 1, 0, 0}, 6.9, 3.0) == doctest::Approx(6.9).epsilon(1e-15));
    CHECK(median_ln_im(GmpeParams{1, 0, -1, 1, 0, 0}, 6.9, std::numbers::e - 1.0) ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("default scenario places Mw 6.9 at 12 km from the centroid") {
    const auto m = line_of_buildings({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
    const auto s = default_scenario(m);
    CHECK(s.magnitude == 6.9);
    CHECK(distance(s.epicenter, m.centroid()) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("zero residuals reproduce the median exactly") {
    const auto m = line_of_buildings({{1, 0}, {5, 0}, {0, 9}});
    ScenarioConfig s;
    s.epicenter = {0, 0};
    s.gmpe.tau = 0.0;
    s.gmpe.phi = 0.0;
    s.seed = 3;
    const auto f = sample_intensity_field(m, s);
    for (std::size_t b = 0; b < m.buildings.size(); ++b)
        CHECK(f.im[b] == std::exp(median_ln_im(s.gmpe, s.magnitude, distance(m.buildings[b].location, s.epicenter))));
}

TEST_CASE("equidistant buildings get identical intensity without residuals") {
    const auto m = line_of_buildings({{3, 4}, {-4, 3}});
    ScenarioConfig s;
    s.gmpe.tau = 0.0;
    s.gmpe.phi = 0.0;
    const auto f = sample_intensity_field(m, s);
    CHECK(f.im[0] == f.im[1]);
}

TEST_CASE("inter-event residual is shared by every building") {
    const auto m = line_of_buildings({{1, 1}, {3, 2}, {8, 1}});
    ScenarioConfig s;
    s.gmpe.tau = 0.3;
    s.gmpe.phi = 0.0;
    s.seed = 11;
    const auto f = sample_intensity_field(m, s);
    CHECK(f.eta != 0.0);
    for (std::size_t b = 0; b < m.buildings.size(); ++b) {
        const double med = median_ln_im(s.gmpe, s.magnitude, distance(m.buildings[b].location, s.epicenter));
        CHECK(std::log(f.im[b]) - med == doctest::Approx(f.eta).epsilon(1e-12));
    }
}

TEST_CASE("intensity does not increase with distance when residuals are zero") {
    std::vector<Point> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({0.5 * i, 0.0});
    const auto m = line_of_buildings(pts);
    ScenarioConfig s;
    s.gmpe.tau = 0.0;
    s.gmpe.phi = 0.0;
    const auto f = sample_intensity_field(m, s);
    for (std::size_t b = 1; b < pts.size(); ++b) CHECK(f.im[b] <= f.im[b - 1]);
}

TEST_CASE("same seed gives the same field, another seed a different one") {
    const auto m = line_of_buildings({{1, 1}, {3, 2}});
    ScenarioConfig s;
    s.seed = 5;
    const auto a = sample_intensity_field(m, s);
    const auto b = sample_intensity_field(m, s);
    CHECK(a.im == b.im);
    s.seed = 6;
    CHECK(sample_intensity_field(m, s).im != a.im);
}

TEST_CASE("invalid scenario inputs are rejected") {
    ScenarioConfig s;
    s.magnitude = 12.0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);
    GmpeParams p;
    p.tau = -0.1;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

}
