#include "pfl/errors.hpp"
#include "pfl/mesh.hpp"

#include "support.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

using namespace pfl;

namespace {

// Outline half width rebuilt from the circle geometry: the arc is tangent to
// the gauge edge and centred one radius above it.
double outline_half_width(const SpecimenParams& p, double x)
{
    const double s = std::abs(x) - 0.5 * p.gauge_length;
    if (s <= 0.0)
        return 0.5 * p.gauge_width;
    const double r = p.fillet_radius;
    const double y = 0.5 * p.gauge_width + r - std::sqrt(std::max(0.0, r * r - s * s));
    return std::min(y, 0.5 * p.grip_width);
}

double outline_area(const SpecimenParams& p)
{
    // composite Simpson on a fine grid
    const int n = 200000;
    const double a = -0.5 * p.total_length, b = 0.5 * p.total_length, h = (b - a) / n;
    double sum = outline_half_width(p, a) + outline_half_width(p, b);
    for (int i = 1; i < n; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * outline_half_width(p, a + i * h);
    return 2.0 * sum * h / 3.0;
}

int brute_nearest(const Mesh& m, Point2 p)
{
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        const double d = std::hypot(m.nodes[i].x - p.x, m.nodes[i].y - p.y);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

} // namespace

TEST_CASE("specimen outline")
{
    const SpecimenParams p;
    CHECK(p.half_width(0.0) == doctest::Approx(6e-3));
    CHECK(p.half_width(0.5 * p.total_length) == doctest::Approx(10e-3));
    // transition length of a 4 mm rise on a 10 mm radius: sqrt(2 r d - d^2) = 8 mm
    CHECK(p.transition_length() == doctest::Approx(8e-3).epsilon(1e-12));
    CHECK(p.area() == doctest::Approx(outline_area(p)).epsilon(1e-7));
}

TEST_CASE("default mesh size and area")
{
    const SpecimenParams p;
    const Mesh m = build_specimen(p, 0.47e-3);
    CHECK_NOTHROW(m.validate());
    CHECK(m.num_nodes() >= 0.8 * 3912);
    CHECK(m.num_nodes() <= 1.2 * 3912);
    CHECK(m.num_elements() >= 0.8 * 7236);
    CHECK(m.num_elements() <= 1.2 * 7236);
    for (std::size_t e = 0; e < m.num_elements(); ++e)
        REQUIRE(m.element_area(e) > 0.0);
    CHECK(std::abs(m.total_area() - outline_area(p)) < 0.005 * outline_area(p));
    CHECK(m.min_edge > 0.0);
    CHECK(m.min_edge == doctest::Approx(compute_min_edge(m)));
}

TEST_CASE("mesh area on coarse and fine grids")
{
    const SpecimenParams p;
    for (double h : {2e-3, 1e-3, 0.6e-3}) {
        const Mesh m = build_specimen(p, h);
        CHECK(std::abs(m.total_area() - outline_area(p)) < 0.005 * outline_area(p));
    }
}

TEST_CASE("degenerate rectangle")
{
    const Mesh m = test::rectangle_mesh(40e-3, 10e-3, 2e-3);
    CHECK_NOTHROW(m.validate());
    for (std::size_t e = 0; e < m.num_elements(); ++e)
        REQUIRE(m.element_area(e) > 0.0);
    CHECK(m.total_area() == doctest::Approx(40e-3 * 10e-3).epsilon(1e-12));
    for (int n : m.fixed_set)
        CHECK(m.nodes[n].x == doctest::Approx(-20e-3));
    for (int n : m.loaded_set)
        CHECK(m.nodes[n].x == doctest::Approx(20e-3));
}

TEST_CASE("invalid geometry")
{
    SpecimenParams p;
    p.total_length = p.gauge_length + 10e-3;  // fillets need 16 mm
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_THROWS_AS(build_specimen(p, 1e-3), ConfigError);

    p = SpecimenParams{};
    p.fillet_radius = 1e-3;  // smaller than the 4 mm rise
    CHECK_THROWS_AS(p.validate(), ConfigError);

    p = SpecimenParams{};
    p.grip_width = 8e-3;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("mesh file round trip")
{
    const Mesh m = build_specimen(SpecimenParams{}, 2e-3);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    REQUIRE(r.num_nodes() == m.num_nodes());
    REQUIRE(r.num_elements() == m.num_elements());
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
        CHECK(r.nodes[i].x == m.nodes[i].x);
        CHECK(r.nodes[i].y == m.nodes[i].y);
    }
    CHECK(r.elements == m.elements);
    CHECK(r.fixed_set == m.fixed_set);
    CHECK(r.loaded_set == m.loaded_set);
}

TEST_CASE("mesh file with arbitrary ids")
{
    std::stringstream ss("NODES\n10 0 0\n20 1 0\n30 0 1\nELEMENTS\n7 10 20 30\nSET fixed\n10\nSET loaded\n20\n");
    const Mesh m = read_mesh(ss);
    CHECK(m.num_nodes() == 3);
    CHECK(m.elements.front() == std::array<int, 3>{0, 1, 2});
    CHECK(m.fixed_set == std::vector<int>{0});
    CHECK(m.loaded_set == std::vector<int>{1});

    std::stringstream bad("NODES\n1 0 0\n2 1 0\nELEMENTS\n1 1 2 9\n");
    CHECK_THROWS_AS(read_mesh(bad), DataError);
}

TEST_CASE("sensor selection")
{
    const SpecimenParams p;
    const Mesh m = build_specimen(p, 1e-3);

    SensorGrid centre{{{0.0, 0.0}}, "centre"};
    const SensorSet one = select_sensors(m, centre);
    REQUIRE(one.node_ids.size() == 1);
    CHECK(one.node_ids[0] == brute_nearest(m, {0.0, 0.0}));

    SensorGrid twice{{{1e-3, 2e-3}, {1e-3, 2e-3}}, "dup"};
    CHECK(select_sensors(m, twice).node_ids.size() == 1);

    CHECK_THROWS_AS(select_sensors(m, SensorGrid{}), ConfigError);

    const SensorGrid grid = default_sensor_grid(p);
    const SensorSet s = select_sensors(m, grid);
    CHECK(s.node_ids.size() >= 100);
    CHECK(s.node_ids == select_sensors(m, grid).node_ids);
    // a sensor near mid gauge and one inside a fillet
    auto near = [&](Point2 q, double tol) {
        return std::any_of(s.node_ids.begin(), s.node_ids.end(), [&](int n) {
            return std::hypot(m.nodes[n].x - q.x, m.nodes[n].y - q.y) < tol;
        });
    };
    CHECK(near({0.0, 0.0}, 1.5e-3));
    const double xf = 0.5 * p.gauge_length + 0.25 * p.transition_length();
    CHECK(near({xf, 0.8 * p.half_width(xf)}, 2e-3));
    CHECK(near({-xf, -0.8 * p.half_width(xf)}, 2e-3));
}
