#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "monofield/builtin_fields.hpp"
#include "monofield/levelset.hpp"
#include "monofield/monotonicity.hpp"
#include "monofield/partition.hpp"
#include "oracles.hpp"

using namespace monofield;

namespace {

ScalarField rect_field(const std::function<double(double, double)>& f, int res, double h,
                       double x0 = 0.0, double y0 = 0.0) {
    return sample_analytic(f, DomainGrid::rectangle(res, res, h, x0, y0));
}

ScalarField punctured_disk_r(int res) {
    // u = |x| on the unit disk with the origin removed
    const double h = 2.0 / (res - 1);
    auto grid = DomainGrid::from_predicate(res, res, h, -1, -1, [](double x, double y) {
        const double r = std::hypot(x, y);
        return r > 1e-9 && r <= 1.0;
    });
    return sample_analytic([](double x, double y) { return std::hypot(x, y); }, grid);
}

}  // namespace

TEST_CASE("linear field is monotone under both methods") {
    const ScalarField u = rect_field([](double x, double) { return x; }, 33, 1.0 / 32);
    for (auto method :
         {MonotonicityMethod::ExhaustiveWindow, MonotonicityMethod::LevelComponent}) {
        const MonotonicityReport r = is_monotone(u, method);
        CHECK(r.monotone);
        CHECK(r.witnesses.empty());
    }
    CHECK_FALSE(oracle::naive_window_scan(u, 1e-12, false).has_value());
}

TEST_CASE("bowl on the disk has a witness window around the origin") {
    const ScalarField u = make_builtin("bowl-disk", 33);
    for (auto method :
         {MonotonicityMethod::ExhaustiveWindow, MonotonicityMethod::LevelComponent}) {
        const MonotonicityReport r = is_monotone(u, method);
        REQUIRE_FALSE(r.monotone);
        REQUIRE_FALSE(r.witnesses.empty());
        bool found_origin = false;
        for (const MonotonicityWitness& w : r.witnesses) {
            // witness invariant: strict violation beyond the tolerance
            if (w.is_max)
                CHECK(w.interior_value > w.boundary_extremum + r.tolerance);
            else
                CHECK(w.interior_value < w.boundary_extremum - r.tolerance);
            const bool contains_origin = w.i0 <= 16 && 16 <= w.i1 && w.j0 <= 16 && 16 <= w.j1;
            found_origin = found_origin || contains_origin;
        }
        CHECK(found_origin);
    }
    CHECK(oracle::naive_window_scan(u, 1e-9, false).has_value());
}

TEST_CASE("saddle is monotone (window oracle at 17x17)") {
    const ScalarField u =
        rect_field([](double x, double y) { return x * x - y * y; }, 17, 2.0 / 16, -1, -1);
    CHECK_FALSE(oracle::naive_window_scan(u, 1e-12, false).has_value());
    CHECK(is_monotone(u, MonotonicityMethod::ExhaustiveWindow, 1e-12).monotone);
    CHECK(is_monotone(u, MonotonicityMethod::LevelComponent, 1e-12).monotone);
}

TEST_CASE("method agreement on all builtins at 33x33") {
    for (const std::string& name : builtin_names()) {
        const ScalarField u = make_builtin(name, 33);
        const bool win = is_monotone(u, MonotonicityMethod::ExhaustiveWindow, 1e-12).monotone;
        const bool lvl = is_monotone(u, MonotonicityMethod::LevelComponent, 1e-12).monotone;
        INFO("builtin ", name);
        CHECK(win == lvl);
    }
}

TEST_CASE("verdicts and witness windows are invariant under increasing affine maps") {
    for (const std::string& name : {std::string("bowl-disk"), std::string("saddle")}) {
        const ScalarField u = make_builtin(name, 25);
        std::vector<double> scaled = u.values();
        for (int n : u.grid().nodes()) scaled[n] = 2.5 * u[n] - 1.0;
        const ScalarField v(u.grid_ptr(), scaled);
        for (auto method :
             {MonotonicityMethod::ExhaustiveWindow, MonotonicityMethod::LevelComponent}) {
            const auto ru = is_monotone(u, method, 1e-10);
            const auto rv = is_monotone(v, method, 2.5 * 1e-10);
            INFO("builtin ", name, " method ", to_string(method));
            CHECK(ru.monotone == rv.monotone);
            REQUIRE(ru.witnesses.size() == rv.witnesses.size());
            for (size_t k = 0; k < ru.witnesses.size(); ++k) {
                CHECK(ru.witnesses[k].i0 == rv.witnesses[k].i0);
                CHECK(ru.witnesses[k].j0 == rv.witnesses[k].j0);
                CHECK(ru.witnesses[k].i1 == rv.witnesses[k].i1);
                CHECK(ru.witnesses[k].j1 == rv.witnesses[k].j1);
                CHECK(ru.witnesses[k].is_max == rv.witnesses[k].is_max);
            }
        }
    }
}

TEST_CASE("strict monotonicity") {
    const ScalarField lin = rect_field([](double x, double) { return x; }, 17, 1.0 / 16);
    CHECK(is_strictly_monotone(lin).monotone);

    const ScalarField cst = rect_field([](double, double) { return 0.5; }, 9, 0.125);
    const auto rc = is_strictly_monotone(cst, 1e-12);
    CHECK_FALSE(rc.monotone);
    CHECK_FALSE(rc.witnesses.empty());

    // plateau: monotone but not strict (window oracle at 9x9)
    const ScalarField plateau =
        rect_field([](double x, double) { return std::max(x, 0.5); }, 9, 0.125);
    CHECK(is_monotone(plateau, MonotonicityMethod::ExhaustiveWindow, 1e-12).monotone);
    CHECK(is_monotone(plateau, MonotonicityMethod::LevelComponent, 1e-12).monotone);
    CHECK_FALSE(is_strictly_monotone(plateau, 1e-12).monotone);
    CHECK_FALSE(oracle::naive_window_scan(plateau, 1e-12, false).has_value());
    CHECK(oracle::naive_window_scan(plateau, 1e-12, true).has_value());
}

TEST_CASE("constant fields are monotone, disconnected masks work per component") {
    const ScalarField cst = rect_field([](double, double) { return 2.0; }, 17, 0.1);
    CHECK(is_monotone(cst, MonotonicityMethod::LevelComponent).monotone);
    CHECK(is_monotone(cst, MonotonicityMethod::ExhaustiveWindow).monotone);

    // two disjoint squares, one with an interior bump
    auto grid = DomainGrid::from_predicate(33, 33, 0.1, 0, 0, [](double x, double) {
        return x <= 1.2 || x >= 2.0;
    });
    const ScalarField split = sample_analytic(
        [](double x, double y) {
            if (x >= 2.0) return -std::hypot(x - 2.6, y - 1.6);  // interior max
            return x;
        },
        grid);
    for (auto method :
         {MonotonicityMethod::ExhaustiveWindow, MonotonicityMethod::LevelComponent}) {
        const auto r = is_monotone(split, method);
        CHECK_FALSE(r.monotone);
        REQUIRE_FALSE(r.witnesses.empty());
        // the witness lives in the right-hand square
        CHECK(split.grid().node_x(r.witnesses[0].node) >= 2.0);
    }
}

TEST_CASE("local extremal values") {
    const ScalarField lin = rect_field([](double x, double) { return x; }, 17, 1.0 / 16);
    CHECK(local_extremal_values(lin).empty());

    const ScalarField bowl = make_builtin("bowl-disk", 33);
    const auto vb = local_extremal_values(bowl);
    REQUIRE(vb.size() == 1);
    CHECK(vb[0] == 0.0);

    // sin(pi x) sin(pi y) on [0,2]^2 sampled on a grid aligned with the extrema
    const ScalarField sine = make_builtin("sine-grid", 33);
    const auto vs = local_extremal_values(sine);
    REQUIRE(vs.size() == 2);
    CHECK(vs[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(vs[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform limits of monotone fields stay monotone at the sup-distance tolerance") {
    const int res = 33;
    const double h = 1.0 / (res - 1);
    auto fk = [&](int k) {
        const double c = 0.05 * std::pow(2.0, -k);
        return rect_field(
            [c](double x, double y) { return x + c * std::sin(M_PI * x) * std::sin(M_PI * y); },
            res, h);
    };
    const ScalarField limit = rect_field([](double x, double) { return x; }, res, h);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const ScalarField f = fk(k);
        CHECK(is_monotone(f, MonotonicityMethod::LevelComponent, 0.0).monotone);
        worst = std::max(worst, sup_distance(f, limit));
    }
    CHECK(is_monotone(limit, MonotonicityMethod::LevelComponent, worst).monotone);
}

TEST_CASE("diameter bound for level components of monotone fields") {
    const ScalarField u = make_builtin("saddle", 65);
    const DomainGrid& g = u.grid();
    const double h = g.h();
    for (double t : {0.3, -0.2, 0.7}) {
        const LevelSetAnalysis analysis = extract_level_set(u, t);
        for (const LevelCurve& comp : analysis.components) {
            if (comp.classification == CurveClass::Point) continue;
            const double diam = comp.diameter();
            for (int k = 0; k < comp.size(); k += 5) {
                double dist = 1e300;
                for (int b : g.boundary_nodes())
                    dist = std::min(dist, std::hypot(comp.xs[k] - g.node_x(b),
                                                     comp.ys[k] - g.node_y(b)));
                CHECK(diam >= dist - 2 * h);
                CHECK(comp.length >= dist - 2 * h);
            }
        }
    }
}

TEST_CASE("glue identity") {
    const ScalarField u = rect_field([](double x, double) { return x; }, 33, 1.0 / 32);
    BandPartition part = build_band_partition(u, {0.25, 0.75}, 1e-12);
    const auto comps = band_components(u.grid(), part.bands[1]);
    REQUIRE(comps.size() == 1);

    // replacement = u restricted to the component plus its interface
    std::vector<std::uint8_t> mask(u.grid().node_count(), 0);
    for (int n : comps[0]) mask[n] = 1;
    for (int n : interface_nodes(u.grid(), comps[0])) mask[n] = 1;
    std::vector<double> vals(u.grid().node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int n = 0; n < u.grid().node_count(); ++n)
        if (mask[n]) vals[n] = u[n];
    std::map<BandComponentKey, ScalarField> repl;
    repl.emplace(BandComponentKey{1, 0}, ScalarField(u.grid().with_mask(mask), vals));

    const ScalarField glued = glue_on_bands(u, part, repl, 1e-9);
    for (int n : u.grid().nodes()) CHECK(glued[n] == u[n]);
}

TEST_CASE("glue rejects range violations (condition iii)") {
    const ScalarField u = rect_field([](double x, double) { return x; }, 17, 1.0 / 16);
    BandPartition part = build_band_partition(u, {0.25, 0.75}, 1e-12);
    const auto comps = band_components(u.grid(), part.bands[1]);
    std::vector<std::uint8_t> mask(u.grid().node_count(), 0);
    std::vector<double> vals(u.grid().node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int n : comps[0]) {
        mask[n] = 1;
        vals[n] = 1.5;  // far above t_{i+1} = 0.75
    }
    for (int n : interface_nodes(u.grid(), comps[0])) {
        mask[n] = 1;
        vals[n] = u[n];
    }
    std::map<BandComponentKey, ScalarField> repl;
    repl.emplace(BandComponentKey{1, 0}, ScalarField(u.grid().with_mask(mask), vals));
    CHECK_THROWS_AS(glue_on_bands(u, part, repl, 1e-9), RangeViolationError);
}

TEST_CASE("the punctured-disk counterexample violates the glue preconditions") {
    const ScalarField u = punctured_disk_r(33);
    // monotone on the punctured disk: components of sublevels encircle the hole
    CHECK(is_monotone(u, MonotonicityMethod::LevelComponent, 1e-12).monotone);
    CHECK(is_monotone(u, MonotonicityMethod::ExhaustiveWindow, 1e-12).monotone);

    BandPartition part = build_band_partition(u, {0.5}, 1e-12);
    const auto comps = band_components(u.grid(), part.bands[0]);
    REQUIRE(!comps.empty());

    auto make_repl = [&](const std::function<double(double)>& f) {
        std::vector<std::uint8_t> mask(u.grid().node_count(), 0);
        std::vector<double> vals(u.grid().node_count(),
                                 std::numeric_limits<double>::quiet_NaN());
        for (int n : comps[0]) {
            mask[n] = 1;
            vals[n] = f(u[n]);
        }
        for (int n : interface_nodes(u.grid(), comps[0])) {
            mask[n] = 1;
            vals[n] = f(u[n]);
        }
        return ScalarField(u.grid().with_mask(mask), vals);
    };

    // u |-> 1 - u maps the inner band into (1/2, 1): range violation
    std::map<BandComponentKey, ScalarField> bad_range;
    bad_range.emplace(BandComponentKey{0, 0}, make_repl([](double v) { return 1.0 - v; }));
    CHECK_THROWS_AS(glue_on_bands(u, part, bad_range, 1e-6), RangeViolationError);

    // u |-> 1/2 - u stays in range but flips the interface values
    std::map<BandComponentKey, ScalarField> bad_iface;
    bad_iface.emplace(BandComponentKey{0, 0}, make_repl([](double v) { return 0.5 - v; }));
    CHECK_THROWS_AS(glue_on_bands(u, part, bad_iface, 1e-6), InterfaceMismatchError);
}

TEST_CASE("glue surfaces a non-monotone replacement") {
    const int res = 33;
    const double h = 1.0 / (res - 1);
    const ScalarField u = rect_field([](double x, double) { return x; }, res, h);
    BandPartition part = build_band_partition(u, {0.25, 0.75}, 1e-12);
    const auto comps = band_components(u.grid(), part.bands[1]);
    REQUIRE(comps.size() == 1);

    // an interior bump that respects the range and vanishes near the interface
    std::vector<std::uint8_t> mask(u.grid().node_count(), 0);
    std::vector<double> vals(u.grid().node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int n : comps[0]) {
        mask[n] = 1;
        const double x = u.grid().node_x(n), y = u.grid().node_y(n);
        const double bump = 0.2 * std::exp(-80.0 * ((x - 0.5) * (x - 0.5) +
                                                    (y - 0.5) * (y - 0.5)));
        vals[n] = std::min(u[n] + bump, 0.749);
    }
    for (int n : interface_nodes(u.grid(), comps[0])) {
        mask[n] = 1;
        vals[n] = u[n];
    }
    std::map<BandComponentKey, ScalarField> repl;
    repl.emplace(BandComponentKey{1, 0}, ScalarField(u.grid().with_mask(mask), vals));
    CHECK_THROWS_AS(glue_on_bands(u, part, repl, 1e-9), MonotonicityViolationError);
}

TEST_CASE("annulus band glued with the analytic log profile stays monotone") {
    const ScalarField u = make_builtin("radial-annulus", 129);
    const double h = u.grid().h();
    BandPartition part = build_band_partition(u, {0.5, 0.75}, 1e-12);
    const auto comps = band_components(u.grid(), part.bands[1]);
    REQUIRE(comps.size() == 1);

    // p = 2 radial harmonic on the sub-annulus 0.5 <= r <= 0.75
    auto vlog = [](double r) {
        return 0.5 + 0.25 * std::log(r / 0.5) / std::log(0.75 / 0.5);
    };
    std::vector<std::uint8_t> mask(u.grid().node_count(), 0);
    std::vector<double> vals(u.grid().node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int n : comps[0]) {
        mask[n] = 1;
        vals[n] = vlog(std::hypot(u.grid().node_x(n), u.grid().node_y(n)));
    }
    for (int n : interface_nodes(u.grid(), comps[0])) {
        mask[n] = 1;
        vals[n] = vlog(std::hypot(u.grid().node_x(n), u.grid().node_y(n)));
    }
    std::map<BandComponentKey, ScalarField> repl;
    repl.emplace(BandComponentKey{1, 0}, ScalarField(u.grid().with_mask(mask), vals));

    // interface values differ from u by O(h |grad|) on the staircase
    const ScalarField glued = glue_on_bands(u, part, repl, 2.0 * h * 1.4);
    CHECK(is_monotone(glued).monotone);
    CHECK(sup_distance(glued, u) < 0.25);
}

TEST_CASE("glue_strict_over") {
    const int res = 33;
    const double h = 2.0 / (res - 1);
    const ScalarField u =
        rect_field([](double, double y) { return y; }, res, h, -1.0, -1.0);

    // core = u off a strip around y = 0, patch = u on the strip plus a ring
    std::vector<std::uint8_t> strip(u.grid().node_count(), 0), core_mask = strip,
                              patch_mask = strip;
    for (int n : u.grid().nodes()) {
        const double y = u.grid().node_y(n);
        if (std::abs(y) < 0.25) strip[n] = 1;
        if (std::abs(y) >= 0.25) core_mask[n] = 1;
        if (std::abs(y) < 0.25 + 2.5 * h) patch_mask[n] = 1;
    }
    const ScalarField core(u.grid().with_mask(core_mask), u.values());
    const ScalarField patch(u.grid().with_mask(patch_mask), u.values());
    GlueVerdict verdict = glue_strict_over(core, patch, 0.0);
    CHECK(verdict.monotone);

    // containment violation: patch too small to cover the closure
    std::vector<std::uint8_t> small_patch(u.grid().node_count(), 0);
    for (int n : u.grid().nodes())
        if (std::abs(u.grid().node_y(n)) < 0.25) small_patch[n] = 1;
    const ScalarField patch2(u.grid().with_mask(small_patch), u.values());
    CHECK_THROWS_AS(glue_strict_over(core, patch2, 0.0), Error);

    // overlap disagreement
    std::vector<double> off = u.values();
    for (int n : u.grid().nodes()) off[n] += 0.5;
    const ScalarField patch3(u.grid().with_mask(patch_mask), off);
    CHECK_THROWS_AS(glue_strict_over(core, patch3, 1e-9), InterfaceMismatchError);
}
