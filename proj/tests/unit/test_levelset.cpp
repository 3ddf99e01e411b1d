#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "monofield/builtin_fields.hpp"
#include "monofield/levelset.hpp"
#include "monofield/monotonicity.hpp"
#include "oracles.hpp"

using namespace monofield;

TEST_CASE("vertical line level set of the linear field") {
    const ScalarField u = make_builtin("linear", 65);
    const double h = u.grid().h();
    const LevelSetAnalysis a = extract_level_set(u, 0.5);
    REQUIRE(a.components.size() == 1);
    const LevelCurve& c = a.components[0];
    CHECK(c.classification == CurveClass::Arc);
    CHECK_FALSE(c.closed);
    CHECK(std::abs(c.length - 1.0) <= 2 * h);
    CHECK(c.touches_boundary);
    // the endpoints sit in top/bottom boundary cells of the line x = 0.5
    const double y_first = c.ys.front(), y_last = c.ys.back();
    CHECK(std::min(y_first, y_last) <= 2 * h);
    CHECK(std::max(y_first, y_last) >= 1.0 - 2 * h);
    for (int k = 0; k < c.size(); ++k) CHECK(std::abs(c.xs[k] - 0.5) <= h);
    CHECK(a.junctions.empty());
    CHECK(hausdorff1_length(a) == doctest::Approx(a.total_length));
}

TEST_CASE("saddle zero level has a junction (origin at a cell center)") {
    const ScalarField u = make_builtin("saddle", 64);
    const LevelSetAnalysis a = extract_level_set(u, 0.0);
    REQUIRE_FALSE(a.junctions.empty());
    CHECK_FALSE(a.is_manifold());
    // the junction cell is the one containing the origin
    const DomainGrid& g = u.grid();
    bool at_origin = false;
    for (const JunctionCell& jc : a.junctions) {
        const double cx = g.x0() + (g.cell_i(jc.cell) + 0.5) * g.h();
        const double cy = g.y0() + (g.cell_j(jc.cell) + 0.5) * g.h();
        if (std::abs(cx) < g.h() && std::abs(cy) < g.h()) at_origin = true;
    }
    CHECK(at_origin);
    // junctions <=> a component fails the clean classification
    bool has_degenerate = false;
    for (const LevelCurve& c : a.components)
        has_degenerate = has_degenerate || c.classification == CurveClass::Degenerate;
    CHECK(has_degenerate);
}

TEST_CASE("saddle branches at t = 0.5 against the arclength quadrature oracle") {
    const ScalarField u = make_builtin("saddle", 129);
    const LevelSetAnalysis a = extract_level_set(u, 0.5);
    REQUIRE(a.components.size() == 2);
    const double expected_branch = oracle::saddle_branch_arclength(0.5);
    for (const LevelCurve& c : a.components) {
        CHECK(c.classification == CurveClass::Arc);
        CHECK(c.length == doctest::Approx(expected_branch).epsilon(0.01));
    }
    CHECK(a.junctions.empty());
}

TEST_CASE("saddle t = +-0.1 yields two boundary-to-boundary arcs each") {
    const ScalarField u = make_builtin("saddle", 128);
    for (double t : {0.1, -0.1}) {
        const LevelSetAnalysis a = extract_level_set(u, t);
        REQUIRE(a.components.size() == 2);
        for (const LevelCurve& c : a.components) {
            CHECK(c.classification == CurveClass::Arc);
            CHECK(c.touches_boundary);
        }
        CHECK(a.junctions.empty());
    }
}

TEST_CASE("annulus circle level") {
    const ScalarField u = make_builtin("radial-annulus", 129);
    const LevelSetAnalysis a = extract_level_set(u, 0.5);
    REQUIRE(a.components.size() == 1);
    const LevelCurve& c = a.components[0];
    CHECK(c.classification == CurveClass::JordanCurve);
    CHECK(c.closed);
    CHECK(c.xs.front() == c.xs.back());
    CHECK(c.ys.front() == c.ys.back());
    CHECK(c.length == doctest::Approx(M_PI).epsilon(0.01));
}

TEST_CASE("empty level set") {
    const ScalarField u = make_builtin("linear", 17);
    const LevelSetAnalysis a = extract_level_set(u, 5.0);
    CHECK(a.components.empty());
    CHECK(a.junctions.empty());
    CHECK(a.total_length == 0.0);
    CHECK_THROWS_AS(extract_level_set(u, std::numeric_limits<double>::quiet_NaN()), Error);
}

TEST_CASE("a plateau level is flagged non-manifold") {
    // t = 0.5 meets the flat part of max(x, 0.5): the level set has interior
    const ScalarField plateau = sample_analytic(
        [](double x, double) { return std::max(x, 0.5); },
        DomainGrid::rectangle(33, 33, 1.0 / 32, 0, 0));
    const LevelSetAnalysis a = extract_level_set(plateau, 0.5);
    CHECK_FALSE(a.is_manifold());
    CHECK_FALSE(a.all_regular());
}

TEST_CASE("distinct levels have disjoint crossing sets") {
    const ScalarField u = make_builtin("saddle", 65);
    auto vertex_set = [](const LevelSetAnalysis& a) {
        std::set<std::pair<double, double>> pts;
        for (const LevelCurve& c : a.components)
            for (int k = 0; k < c.size(); ++k) pts.insert({c.xs[k], c.ys[k]});
        return pts;
    };
    const auto s = vertex_set(extract_level_set(u, 0.30));
    const auto t = vertex_set(extract_level_set(u, 0.31));
    for (const auto& pt : s) CHECK(t.count(pt) == 0);
}

TEST_CASE("regular levels of monotone fields classify cleanly") {
    const ScalarField annulus = make_builtin("radial-annulus", 65);
    for (double t : {0.3, 0.5, 0.9}) {
        const LevelSetAnalysis a = extract_level_set(annulus, t);
        CHECK(a.junctions.empty());
        for (const LevelCurve& c : a.components) {
            const bool clean = c.classification == CurveClass::JordanCurve ||
                               c.classification == CurveClass::Arc;
            CHECK(clean);
        }
    }
    const ScalarField saddle = make_builtin("saddle", 65);
    for (double t : {0.15, -0.45, 0.75}) {
        for (const LevelCurve& c : extract_level_set(saddle, t).components) {
            CHECK(c.classification != CurveClass::Point);
            CHECK(c.classification != CurveClass::Degenerate);
        }
    }
}

TEST_CASE("coarea identity") {
    CHECK_THROWS_AS(coarea_check(make_builtin("linear", 17), 4), Error);

    const CoareaReport lin = coarea_check(make_builtin("linear", 129), 64);
    CHECK(lin.lhs == doctest::Approx(1.0).epsilon(0.01));
    CHECK(lin.rhs == doctest::Approx(1.0).epsilon(0.01));
    CHECK(lin.rel_error < 1e-2);

    CHECK(coarea_check(make_builtin("radial-annulus", 129), 64).rel_error <= 0.02);

    // both sides against the analytic area at h = 1/128: the staircase rim is
    // resolved well enough there for the 2% claim
    const CoareaReport ann = coarea_check(make_builtin("radial-annulus", 257), 64);
    const double annulus_area = 15.0 * M_PI / 16.0;
    CHECK(ann.lhs == doctest::Approx(annulus_area).epsilon(0.02));
    CHECK(ann.rhs == doctest::Approx(annulus_area).epsilon(0.02));
    CHECK(ann.rel_error <= 0.02);

    // independent 2D quadrature of |grad (x^2 - y^2)| = 2 sqrt(x^2 + y^2)
    const double saddle_rhs = oracle::simpson2d(
        [](double x, double y) { return 2.0 * std::hypot(x, y); }, -1, 1, -1, 1, 400);
    CHECK(saddle_rhs == doctest::Approx(16.0 * (std::sqrt(2.0) + std::asinh(1.0)) / 6.0)
                            .epsilon(1e-5));
    const CoareaReport sad = coarea_check(make_builtin("saddle", 129), 64);
    CHECK(sad.rhs == doctest::Approx(saddle_rhs).epsilon(0.02));
    CHECK(sad.rel_error <= 0.02);

    // constant field: both sides vanish
    const ScalarField cst =
        sample_analytic([](double, double) { return 3.0; }, DomainGrid::rectangle(17, 17, 0.1, 0, 0));
    const CoareaReport cr = coarea_check(cst, 16);
    CHECK(cr.lhs == 0.0);
    CHECK(cr.rhs == 0.0);
    CHECK(cr.rel_error == 0.0);
}

TEST_CASE("select_regular_levels") {
    const ScalarField lin = make_builtin("linear", 65);
    const auto kept = select_regular_levels(lin, {0.25, 0.5, 0.75}, 0.05);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0] == 0.25);
    CHECK(kept[1] == 0.5);
    CHECK(kept[2] == 0.75);

    // the saddle's only junction value is 0
    const ScalarField sad = make_builtin("saddle", 64);
    const auto moved = select_regular_levels(sad, {0.0}, 0.05);
    REQUIRE(moved.size() == 1);
    CHECK(moved[0] != 0.0);
    CHECK(std::abs(moved[0]) <= 0.05);
    CHECK(extract_level_set(sad, moved[0]).all_regular());

    // sine-grid: the zero level runs through lattice nodes and crosses itself
    const ScalarField sine = make_builtin("sine-grid", 65);
    CHECK_FALSE(extract_level_set(sine, 0.0).all_regular());  // junction scan
    const auto shifted = select_regular_levels(sine, {0.0}, 0.05);
    REQUIRE(shifted.size() == 1);
    CHECK(shifted[0] != 0.0);
    CHECK(extract_level_set(sine, shifted[0]).all_regular());

    // schedules are strictly increasing
    const auto many = select_regular_levels(sad, {-0.5, -0.1, 0.1, 0.5}, 0.02);
    for (size_t k = 1; k < many.size(); ++k) CHECK(many[k] > many[k - 1]);

    CHECK_THROWS_AS(select_regular_levels(lin, {0.2, 0.4}, 0.2), Error);  // jitter too large
    CHECK_THROWS_AS(select_regular_levels(lin, {0.5}, 0.0), Error);
}

TEST_CASE("analysis serialization") {
    const ScalarField u = make_builtin("radial-annulus", 33);
    const LevelSetAnalysis a = extract_level_set(u, 0.5);
    const std::string doc = a.to_json();
    CHECK(doc.find("JordanCurve") != std::string::npos);
    std::ostringstream csv;
    write_contours_csv(a, csv);
    CHECK(csv.str().rfind("component,vertex,x,y\n", 0) == 0);
}
