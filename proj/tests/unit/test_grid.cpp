#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "monofield/builtin_fields.hpp"
#include "monofield/field_io.hpp"
#include "monofield/grid.hpp"
#include "oracles.hpp"

using namespace monofield;

namespace {

ScalarField make_rect_field(const std::function<double(double, double)>& f, int res,
                            double h, double x0 = 0.0, double y0 = 0.0) {
    return sample_analytic(f, DomainGrid::rectangle(res, res, h, x0, y0));
}

// deterministic pseudo-random values for property checks
double lcg_value(int& state) {
    state = static_cast<int>((1103515245LL * state + 12345) & 0x7fffffff);
    return (state % 20000) / 10000.0 - 1.0;
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(DomainGrid(2, 5, 0.1, 0, 0, std::vector<std::uint8_t>(10, 1)), Error);
    CHECK_THROWS_AS(DomainGrid(5, 5, 0.0, 0, 0, std::vector<std::uint8_t>(25, 1)), Error);
    CHECK_THROWS_AS(DomainGrid(5, 5, 0.1, 0, 0, std::vector<std::uint8_t>(25, 0)), Error);

    auto g = DomainGrid::rectangle(5, 4, 0.5, -1.0, 2.0);
    CHECK(g->node_count() == 20);
    CHECK(g->cell_count() == 12);
    CHECK(g->node_x(g->node_index(2, 1)) == doctest::Approx(0.0));
    CHECK(g->node_y(g->node_index(2, 1)) == doctest::Approx(2.5));

    // every masked cell has four masked corners
    for (int c : g->cells()) {
        const int i = g->cell_i(c), j = g->cell_j(c);
        CHECK(g->node_in(i, j));
        CHECK(g->node_in(i + 1, j));
        CHECK(g->node_in(i, j + 1));
        CHECK(g->node_in(i + 1, j + 1));
    }

    // boundary nodes of the full rectangle are exactly the frame
    for (int n : g->nodes()) {
        const bool frame = g->node_i(n) == 0 || g->node_i(n) == 4 || g->node_j(n) == 0 ||
                           g->node_j(n) == 3;
        CHECK(g->is_boundary_node(n) == frame);
    }
    CHECK_FALSE(g->has_holes());

    // a punctured rectangle has a hole
    std::vector<std::uint8_t> mask(7 * 7, 1);
    mask[3 * 7 + 3] = 0;
    DomainGrid punctured(7, 7, 0.25, 0, 0, std::move(mask));
    CHECK(punctured.has_holes());
}

TEST_CASE("sample_analytic") {
    const ScalarField zero = make_rect_field([](double, double) { return 0.0; }, 5, 0.25);
    for (int n : zero.grid().nodes()) CHECK(zero[n] == 0.0);

    const ScalarField lin = make_rect_field([](double x, double) { return x; }, 3, 0.5);
    CHECK(lin.at(0, 1) == 0.0);
    CHECK(lin.at(1, 1) == 0.5);
    CHECK(lin.at(2, 1) == 1.0);

    const ScalarField quad =
        make_rect_field([](double x, double y) { return x * x - y * y; }, 5, 0.25);
    CHECK(quad.at(1, 2) == doctest::Approx(-0.1875).epsilon(1e-15));  // node (0.25, 0.5)

    CHECK_THROWS_AS(make_rect_field([](double x, double) { return 1.0 / x; }, 5, 0.25), Error);
}

TEST_CASE("gradient exactness") {
    const ScalarField lin =
        make_rect_field([](double x, double y) { return 2.0 * x - 3.0 * y + 1.0; }, 9, 0.125);
    const VectorField g = gradient(lin);
    for (int c : lin.grid().cells()) {
        CHECK(g.gx(c) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(g.gy(c) == doctest::Approx(-3.0).epsilon(1e-14));
    }

    const ScalarField cst = make_rect_field([](double, double) { return 7.0; }, 9, 0.125);
    const VectorField gc = gradient(cst);
    for (int c : cst.grid().cells()) {
        CHECK(gc.gx(c) == 0.0);
        CHECK(gc.gy(c) == 0.0);
    }

    // cell centered at (0.25, 0.25) with h = 1/64: gradient of x^2 - y^2 is
    // exact at the center
    const double h = 1.0 / 64.0;
    const ScalarField quad = sample_analytic(
        [](double x, double y) { return x * x - y * y; },
        DomainGrid::rectangle(40, 40, h, -0.5 * h, -0.5 * h));
    const VectorField gq = gradient(quad);
    const int c = quad.grid().cell_index(16, 16);
    CHECK(std::abs(quad.grid().x0() + (16 + 0.5) * h - 0.25) < 1e-15);
    CHECK(gq.gx(c) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gq.gy(c) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("gradient is linear") {
    auto grid = DomainGrid::from_predicate(17, 17, 0.125, -1, -1, [](double x, double y) {
        return x * x + y * y <= 1.1;
    });
    int seed = 42;
    std::vector<double> va(grid->node_count(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> vb = va;
    std::vector<double> vsum = va;
    for (int n : grid->nodes()) {
        va[n] = lcg_value(seed);
        vb[n] = lcg_value(seed);
        vsum[n] = va[n] + vb[n];
    }
    const ScalarField a(grid, va), b(grid, vb), sum(grid, vsum);
    const VectorField ga = gradient(a), gb = gradient(b), gs = gradient(sum);
    for (int c : grid->cells()) {
        CHECK(gs.gx(c) == doctest::Approx(ga.gx(c) + gb.gx(c)).epsilon(1e-12));
        CHECK(gs.gy(c) == doctest::Approx(ga.gy(c) + gb.gy(c)).epsilon(1e-12));
    }
}

TEST_CASE("sup_distance") {
    const ScalarField u = make_rect_field([](double x, double) { return x; }, 33, 1.0 / 32);
    CHECK(sup_distance(u, u) == 0.0);

    const ScalarField shifted =
        make_rect_field([](double x, double) { return x + 0.3; }, 33, 1.0 / 32);
    CHECK(sup_distance(u, shifted) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(sup_distance(shifted, u) == sup_distance(u, shifted));

    // independent scan of max |x - x^2| over the sampled nodes
    const ScalarField sq = make_rect_field([](double x, double) { return x * x; }, 33, 1.0 / 32);
    double expected = 0.0;
    for (int i = 0; i < 33; ++i) {
        const double x = i / 32.0;
        expected = std::max(expected, std::abs(x - x * x));
    }
    CHECK(sup_distance(u, sq) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(sup_distance(u, sq) - 0.25) < 1.0 / 32);

    const ScalarField other = make_rect_field([](double x, double) { return x; }, 17, 1.0 / 16);
    CHECK_THROWS_AS(sup_distance(u, other), GridMismatchError);
}

TEST_CASE("lp_grad_distance") {
    const int res = 33;
    const double h = 1.0 / (res - 1);
    const ScalarField x1 = make_rect_field([](double x, double) { return x; }, res, h);
    const ScalarField x2 = make_rect_field([](double x, double) { return 2 * x; }, res, h);
    const ScalarField y1 = make_rect_field([](double, double y) { return y; }, res, h);

    CHECK(lp_grad_distance(x1, x1, 2.0) == 0.0);
    CHECK(lp_grad_distance(x1, x2, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp_grad_distance(x1, y1, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(lp_grad_distance(x1, x2, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp_grad_distance(x2, x1, 2.0) == lp_grad_distance(x1, x2, 2.0));

    CHECK_THROWS_AS(lp_grad_distance(x1, x2, 1.0), Error);
    CHECK_THROWS_AS(lp_grad_distance(x1, x2, std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("field JSON round trip is exact") {
    const ScalarField u = make_builtin("radial-annulus", 33);
    const std::string text = field_to_json(u);
    const ScalarField back = field_from_json(text);
    REQUIRE(back.grid() == u.grid());
    for (int n : u.grid().nodes()) CHECK(back[n] == u[n]);
    CHECK(text.find("null") != std::string::npos);

    CHECK_THROWS_AS(field_from_json("{\"nx\": 4}"), Error);
    CHECK_THROWS_AS(field_from_json("not json"), Error);
}

TEST_CASE("field CSV export") {
    const ScalarField u = make_builtin("bowl-disk", 17);
    std::ostringstream out;
    write_field_csv(u, out);
    const std::string text = out.str();
    CHECK(text.rfind("i,j,x,y,value\n", 0) == 0);
    const auto rows = std::count(text.begin(), text.end(), '\n');
    CHECK(rows == static_cast<long>(u.grid().nodes().size()) + 1);
}

TEST_CASE("scalar field rejects non-finite values") {
    auto grid = DomainGrid::rectangle(3, 3, 1.0, 0, 0);
    std::vector<double> values(9, 0.0);
    values[4] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ScalarField(grid, values), Error);
}
