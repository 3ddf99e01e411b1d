#include "monofield/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "monofield/levelset.hpp"
#include "monofield/monotonicity.hpp"
#include "monofield/smoothing.hpp"

namespace monofield {

using nlohmann::json;

bool ApproxReport::all_pass() const {
    for (const auto& stage : stages)
        for (const auto& a : stage.assertions)
            if (!a.pass) return false;
    for (const auto& a : assertions)
        if (!a.pass) return false;
    return true;
}

std::string ApproxReport::to_json() const {
    auto assertions_json = [](const std::vector<Assertion>& as) {
        json arr = json::array();
        for (const Assertion& a : as)
            arr.push_back({{"name", a.name}, {"pass", a.pass}, {"lhs", a.lhs}, {"rhs", a.rhs}});
        return arr;
    };
    json stage_arr = json::array();
    for (const StageReport& s : stages) {
        stage_arr.push_back({{"name", s.name},
                             {"sup_dist_to_input", s.sup_dist_to_input},
                             {"sup_dist_to_original", s.sup_dist_to_original},
                             {"lp_grad_dist_to_original", s.lp_grad_dist_to_original},
                             {"energy_before", s.energy_before},
                             {"energy_after", s.energy_after},
                             {"monotone", s.monotone},
                             {"changed_nodes", s.changed_nodes},
                             {"levels", s.levels},
                             {"assertions", assertions_json(s.assertions)}});
    }
    json curve_arr = json::array();
    for (const CurveRecord& c : curves) {
        curve_arr.push_back({{"lens", c.lens},
                             {"level", c.level},
                             {"component", c.component},
                             {"action", c.action},
                             {"case", c.case_name},
                             {"kink_before", c.kink_before},
                             {"kink_after", c.kink_after},
                             {"beta", c.beta},
                             {"gamma", c.gamma},
                             {"delta", c.delta}});
    }
    json doc;
    doc["p"] = p;
    doc["stages"] = std::move(stage_arr);
    doc["curves"] = std::move(curve_arr);
    doc["p_harmonic_fraction"] = p_harmonic_fraction;
    doc["kink_tolerance"] = kink_tolerance;
    doc["kink_max_after"] = kink_max_after;
    doc["sup_dist_total"] = sup_dist_total;
    doc["lp_grad_dist_total"] = lp_grad_dist_total;
    doc["assertions"] = assertions_json(assertions);
    doc["all_pass"] = all_pass();
    return doc.dump(2);
}

namespace {

Assertion make_assert(const std::string& name, bool pass, double lhs, double rhs) {
    return Assertion{name, pass, lhs, rhs};
}

int count_changed(const ScalarField& a, const ScalarField& b) {
    int count = 0;
    for (int n : a.grid().nodes())
        if (a[n] != b[n]) ++count;
    return count;
}

// Solves every 4-connected component of every listed band with the field's
// own trace as boundary data and the field as warm start.
std::map<BandComponentKey, ScalarField> solve_bands(const ScalarField& u,
                                                    const BandPartition& partition,
                                                    const std::vector<int>& band_ids, double p,
                                                    const PipelineConfig& cfg) {
    const DomainGrid& g = u.grid();
    std::map<BandComponentKey, ScalarField> replacements;
    for (int band : band_ids) {
        const auto comps = band_components(g, partition.bands[band]);
        for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci) {
            // free only nodes interior to the union of masked cells; nodes on
            // the staircase boundary keep the field's values (discrete
            // zero-trace condition, and Dirichlet data along every boundary
            // edge of the solve polygon)
            std::vector<int> region;
            for (int n : comps[ci])
                if (g.is_cell_interior_node(n)) region.push_back(n);
            if (region.empty()) continue;
            DirichletProblemSpec spec;
            spec.grid = u.grid_ptr();
            spec.region = region;
            spec.p = p;
            spec.tol = cfg.solver_tol;
            spec.max_iter = cfg.solver_max_iter;
            spec.eps_reg = cfg.eps_reg_initial;
            spec.eps_stages = cfg.eps_reg_stages;
            for (int n : interface_nodes(g, region)) spec.boundary_data.emplace_back(n, u[n]);
            auto [solution, info] = dirichlet_solve(spec, &u);
            if (!info.converged && info.grad_norm > 0) {
                // The solver already guarantees no energy increase; a
                // non-converged component surfaces in the report through the
                // energy numbers. Reject only hard failures.
                if (!std::isfinite(info.energy))
                    throw SolveError("band solve diverged");
            }
            replacements.emplace(BandComponentKey{band, ci}, std::move(solution));
        }
    }
    return replacements;
}

}  // namespace

Step1Result step1_band_replace(const ScalarField& u, double delta, double p,
                               const PipelineConfig& cfg) {
    if (!(delta > 0)) throw Error("step1_band_replace: delta must be positive");
    const double range = u.range();
    const double mono_tol = cfg.mono_tol_rel * std::max(range, 1e-300);
    if (!is_monotone(u, MonotonicityMethod::LevelComponent, mono_tol).monotone)
        throw MonotonicityViolationError("step1_band_replace: input field is not monotone");

    StageReport stage;
    stage.name = "step1-band-replace";
    const double energy_before = p_energy(u, p);
    stage.energy_before = energy_before;

    if (range <= 0) {
        Step1Result out{u, {}, {}};
        stage.energy_after = energy_before;
        stage.monotone = true;
        out.report.p = p;
        out.report.stages.push_back(stage);
        return out;
    }

    const double umin = u.min();
    const int m = std::max(1, static_cast<int>(std::ceil(range / (0.9 * delta))));
    const double gap = range / m;
    std::vector<double> targets;
    for (int k = 1; k < m; ++k) targets.push_back(umin + k * gap);
    const double jitter = std::min(gap / 8.0, 0.05 * (delta - gap));

    std::vector<double> levels;
    if (!targets.empty()) levels = select_regular_levels(u, targets, jitter, cfg.level_budget);

    const double snap = 1e-12 * range;
    BandPartition partition = build_band_partition(u, levels, snap);
    std::vector<int> all_bands(partition.bands.size());
    for (size_t i = 0; i < all_bands.size(); ++i) all_bands[i] = static_cast<int>(i);

    // gluing tolerance: solver round-off plus the overshoot the interface
    // data itself carries, up to sqrt(2) h |grad u| beyond the band levels on
    // a staircase interface
    const VectorField grad_u = gradient(u);
    double max_grad = 0.0;
    for (int c : u.grid().cells()) max_grad = std::max(max_grad, grad_u.norm(c));
    const double h = u.grid().h();
    const double glue_tol = std::max(cfg.glue_tol_rel * range, 1.5 * h * max_grad);
    auto replacements = solve_bands(u, partition, all_bands, p, cfg);
    ScalarField u_delta = glue_on_bands(u, partition, replacements, glue_tol);

    const double energy_after = p_energy(u_delta, p);
    const double sup = sup_distance(u_delta, u);
    stage.energy_after = energy_after;
    stage.sup_dist_to_input = sup;
    stage.sup_dist_to_original = sup;
    stage.lp_grad_dist_to_original = lp_grad_distance(u_delta, u, std::max(p, 1.0 + 1e-9));
    stage.changed_nodes = count_changed(u_delta, u);
    stage.levels = levels;
    stage.monotone = is_monotone(u_delta, MonotonicityMethod::LevelComponent, mono_tol).monotone;

    stage.assertions.push_back(make_assert("sup|u_delta - u| < 2 delta", sup < 2 * delta, sup,
                                           2 * delta));
    stage.assertions.push_back(
        make_assert("E_p(u_delta) <= E_p(u)", energy_after <= energy_before, energy_after,
                    energy_before));
    stage.assertions.push_back(make_assert("u_delta monotone", stage.monotone, 0, 0));

    // per-band value range (comparison principle through the glue conditions)
    bool ranges_ok = true;
    {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<int> band_of_node(u.grid().node_count(), -1);
        for (size_t b = 0; b < partition.bands.size(); ++b)
            for (int n : partition.bands[b]) band_of_node[n] = static_cast<int>(b);
        for (int n : u.grid().nodes()) {
            const int b = band_of_node[n];
            if (b < 0) continue;
            const double lo = b == 0 ? -inf : partition.levels[b - 1];
            const double hi =
                b == static_cast<int>(partition.levels.size()) ? inf : partition.levels[b];
            if (u_delta[n] < lo - glue_tol || u_delta[n] > hi + glue_tol) ranges_ok = false;
        }
        stage.assertions.push_back(make_assert("band value ranges", ranges_ok, 0, 0));

        // containment of the output's strict level regions in the input bands
        bool containment_ok = true;
        const double margin = glue_tol + 2 * snap;
        for (int n : u.grid().nodes()) {
            const double v = u_delta[n];
            const int b = partition.band_of_value(v);
            const double lo = b == 0 ? -inf : partition.levels[b - 1];
            const double hi =
                b == static_cast<int>(partition.levels.size()) ? inf : partition.levels[b];
            if (v > lo + margin && v < hi - margin && band_of_node[n] != b) {
                containment_ok = false;
                break;
            }
        }
        stage.assertions.push_back(
            make_assert("level-region containment", containment_ok, 0, 0));
    }

    Step1Result out{std::move(u_delta), {}, std::move(partition)};
    out.report.p = p;
    out.report.stages.push_back(std::move(stage));
    out.report.sup_dist_total = sup;
    return out;
}

Step2Result step2_lens_replace(const ScalarField& v, double eta,
                               const std::vector<double>& original_levels, double p,
                               const PipelineConfig& cfg) {
    if (!(eta > 0)) throw Error("step2_lens_replace: eta must be positive");
    double min_gap = std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < original_levels.size(); ++k)
        min_gap = std::min(min_gap, original_levels[k] - original_levels[k - 1]);
    if (!(eta < min_gap))
        throw Error("step2_lens_replace: eta must be below the minimal level gap");

    const double range = v.range();
    const double mono_tol = cfg.mono_tol_rel * std::max(range, 1e-300);
    const double snap = 1e-12 * range;

    StageReport stage;
    stage.name = "step2-lens-replace";
    stage.energy_before = p_energy(v, p);

    // gradient floor for rejecting levels through near-critical cells
    const VectorField grad_v = gradient(v);
    double max_grad = 0.0;
    for (int c : v.grid().cells()) max_grad = std::max(max_grad, grad_v.norm(c));
    const double glue_tol =
        std::max(cfg.glue_tol_rel * range, 1.5 * v.grid().h() * max_grad);
    const double floor = cfg.lens_grad_floor_rel * max_grad;
    const DomainGrid& g = v.grid();
    auto away_from_critical = [&](double, const LevelSetAnalysis& analysis) {
        for (const LevelCurve& curve : analysis.components) {
            for (int k = 0; k < curve.size(); ++k) {
                const int ci = std::clamp(
                    static_cast<int>(std::floor((curve.xs[k] - g.x0()) / g.h())), 0, g.nx() - 2);
                const int cj = std::clamp(
                    static_cast<int>(std::floor((curve.ys[k] - g.y0()) / g.h())), 0, g.ny() - 2);
                if (!g.cell_in(ci, cj)) continue;
                if (grad_v.norm(g.cell_index(ci, cj)) < floor) return false;
            }
        }
        return true;
    };

    // choose the lens levels around each original level
    const double vmin = v.min(), vmax = v.max();
    std::vector<double> lens_levels;
    std::vector<std::pair<double, double>> pairs;
    for (double t : original_levels) {
        const double off = 0.4 * eta;
        const double jit = eta / 16.0;
        std::vector<double> targets{t - off, t + off};
        if (targets[0] <= vmin || targets[1] >= vmax)
            throw Error("step2_lens_replace: lens targets leave the field range");
        auto picked = select_regular_levels(v, targets, jit, cfg.level_budget,
                                            away_from_critical);
        if (!lens_levels.empty() && picked[0] <= lens_levels.back())
            throw Error("step2_lens_replace: lens ordering violated");
        pairs.emplace_back(picked[0], picked[1]);
        lens_levels.push_back(picked[0]);
        lens_levels.push_back(picked[1]);
    }

    BandPartition lens_partition = build_band_partition(v, lens_levels, snap);
    // odd bands are the lenses (t_j^-, t_j^+)
    std::vector<int> lens_bands;
    for (size_t j = 0; j < pairs.size(); ++j) lens_bands.push_back(static_cast<int>(2 * j + 1));

    auto replacements = solve_bands(v, lens_partition, lens_bands, p, cfg);
    ScalarField w = glue_on_bands(v, lens_partition, replacements, glue_tol);

    const double sup = sup_distance(w, v);
    stage.energy_after = p_energy(w, p);
    stage.sup_dist_to_input = sup;
    stage.changed_nodes = count_changed(w, v);
    stage.levels = lens_levels;
    stage.monotone = is_monotone(w, MonotonicityMethod::LevelComponent, mono_tol).monotone;
    stage.assertions.push_back(make_assert("sup|w - v| < 2 eta", sup < 2 * eta, sup, 2 * eta));
    stage.assertions.push_back(make_assert("E_p(w) <= E_p(v)",
                                           stage.energy_after <= stage.energy_before,
                                           stage.energy_after, stage.energy_before));
    stage.assertions.push_back(make_assert("w monotone", stage.monotone, 0, 0));
    bool interleaved = true;
    for (size_t j = 0; j < pairs.size(); ++j) {
        if (!(pairs[j].first < original_levels[j] && original_levels[j] < pairs[j].second))
            interleaved = false;
        if (j > 0 && !(pairs[j - 1].second < pairs[j].first)) interleaved = false;
        if (!(pairs[j].second - pairs[j].first < eta)) interleaved = false;
    }
    stage.assertions.push_back(make_assert("lens interleaving", interleaved, 0, 0));

    Step2Result out{std::move(w), {}, {}};
    out.lens.pairs = pairs;
    for (int b : lens_bands) out.lens.lenses.push_back(lens_partition.bands[b]);
    out.report.p = p;
    out.report.stages.push_back(std::move(stage));
    return out;
}

Step3Result step3_smooth_all(const ScalarField& w, const ScalarField& v,
                             const LensPartition& lens, double p, double strip_cap,
                             const PipelineConfig& cfg) {
    const DomainGrid& g = w.grid();
    const double h = g.h();
    const double range = w.range();
    const double mono_tol = cfg.mono_tol_rel * std::max(range, 1e-300);

    StageReport stage;
    stage.name = "step3-smooth";
    stage.energy_before = p_energy(w, p);

    const VectorField grad_w = gradient(w);
    double max_grad = 0.0;
    for (int c : g.cells()) max_grad = std::max(max_grad, grad_w.norm(c));
    const double kink_tol = cfg.kink_tol_rel * std::max(max_grad, 1e-300);

    struct Job {
        int lens;
        double level;
        int component;
        LevelCurve curve;
    };
    std::vector<Job> jobs;
    for (size_t j = 0; j < lens.pairs.size(); ++j) {
        for (double level : {lens.pairs[j].first, lens.pairs[j].second}) {
            LevelSetAnalysis analysis = extract_level_set(v, level);
            for (int ci = 0; ci < static_cast<int>(analysis.components.size()); ++ci) {
                LevelCurve& curve = analysis.components[ci];
                if (curve.classification == CurveClass::Point) continue;
                jobs.push_back(Job{static_cast<int>(j), level, ci, std::move(curve)});
            }
        }
    }

    // distance from each curve to the nearest other curve, via hashing the
    // vertices into buckets of the interaction radius
    std::vector<double> min_foreign(jobs.size(), std::numeric_limits<double>::infinity());
    {
        const double radius = std::max(
            8.0 * h, strip_cap > 0 ? 2.5 * strip_cap : 8.0 * h);
        std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> buckets;
        auto bucket_of = [&](double x, double y) {
            return std::make_pair(static_cast<int>(std::floor(x / radius)),
                                  static_cast<int>(std::floor(y / radius)));
        };
        for (size_t a = 0; a < jobs.size(); ++a)
            for (int k = 0; k < jobs[a].curve.size(); ++k)
                buckets[bucket_of(jobs[a].curve.xs[k], jobs[a].curve.ys[k])].emplace_back(
                    static_cast<int>(a), k);
        for (size_t a = 0; a < jobs.size(); ++a) {
            for (int k = 0; k < jobs[a].curve.size(); ++k) {
                const auto center = bucket_of(jobs[a].curve.xs[k], jobs[a].curve.ys[k]);
                for (int dj = -1; dj <= 1; ++dj) {
                    for (int di = -1; di <= 1; ++di) {
                        const auto it =
                            buckets.find({center.first + di, center.second + dj});
                        if (it == buckets.end()) continue;
                        for (const auto& [b, kb] : it->second) {
                            if (b == static_cast<int>(a)) continue;
                            const double d =
                                std::hypot(jobs[a].curve.xs[k] - jobs[b].curve.xs[kb],
                                           jobs[a].curve.ys[k] - jobs[b].curve.ys[kb]);
                            min_foreign[a] = std::min(min_foreign[a], d);
                        }
                    }
                }
            }
        }
    }

    ApproxReport report;
    report.p = p;
    report.kink_tolerance = kink_tol;
    ScalarField current = w;
    std::vector<std::uint8_t> claimed(g.node_count(), 0);

    for (size_t a = 0; a < jobs.size(); ++a) {
        const Job& job = jobs[a];
        CurveRecord record;
        record.lens = job.lens;
        record.level = job.level;
        record.component = job.component;

        auto skip = [&](const std::string& reason) {
            record.action = "skipped-" + reason;
            report.curves.push_back(record);
        };

        // geometric feasibility: the strip may claim at most 45% of the gap
        // to the nearest other curve, and no less than 4h
        const double gap_cap =
            std::isfinite(min_foreign[a]) ? 0.45 * min_foreign[a]
                                          : std::numeric_limits<double>::infinity();
        if (gap_cap < 4.0 * h) {
            if (cfg.strict_strips) {
                std::ostringstream msg;
                msg << "step3_smooth_all: curves closer than 4h (gap " << min_foreign[a]
                    << ", h " << h << ")";
                throw StripCollisionError(msg.str());
            }
            skip("collision");
            continue;
        }
        double beta_cap = gap_cap;
        if (strip_cap > 0) beta_cap = std::min(beta_cap, strip_cap);
        if (beta_cap < 4.0 * h) {
            if (cfg.strict_strips)
                throw StripCollisionError("step3_smooth_all: strip cap below 4h");
            skip("cap-below-resolution");
            continue;
        }
        const double reach = std::min(2.5 * beta_cap, gap_cap * 2.0);

        TubularChart chart;
        try {
            chart = build_chart(current, job.curve, std::max(reach, 2.1 * h));
        } catch (const StripTooTightError&) {
            if (cfg.strict_strips) throw;
            skip("self-tight");
            continue;
        }

        SideClassification sides =
            classify_sides(current, chart, job.level, std::max(mono_tol, 1e-9 * range));
        record.case_name = to_string(sides.kind);
        if (sides.kind == SmoothingCase::AllFlat) {
            skip("flat");
            continue;
        }

        record.kink_before = kink_across_curve(current, job.curve, 1.5 * h);
        if (record.kink_before <= kink_tol) {
            skip("kink-below-tolerance");
            continue;
        }

        SmoothingProfile profile;
        try {
            profile = fit_profile(current, chart, sides, cfg.safety, beta_cap);
            if (cfg.sup_budget > 0 &&
                profile.beta * (profile.gamma + profile.delta) > cfg.sup_budget) {
                const double capped =
                    cfg.sup_budget / (profile.gamma + profile.delta);
                if (capped < 4.0 * h) {
                    skip("sup-budget-below-resolution");
                    continue;
                }
                profile = fit_profile(current, chart, sides, cfg.safety, capped);
            }
        } catch (const DegenerateProfileError&) {
            if (cfg.strict_strips) throw;
            skip("degenerate-gradient");
            continue;
        }

        // pairwise disjoint strips: never touch a node claimed by an earlier
        // curve
        bool overlap = false;
        std::vector<int> strip_nodes;
        for (const TubularChart::Entry& e : chart.entries) {
            if (std::abs(e.y) >= profile.beta) continue;
            strip_nodes.push_back(e.node);
            if (claimed[e.node]) overlap = true;
        }
        if (overlap) {
            if (cfg.strict_strips)
                throw StripCollisionError("step3_smooth_all: strips overlap");
            skip("claimed-overlap");
            continue;
        }

        ScalarField smoothed = apply_smoothing(current, chart, profile, job.level);
        record.kink_after = kink_across_curve(smoothed, job.curve, 1.5 * h);
        record.beta = profile.beta;
        record.gamma = profile.gamma;
        record.delta = profile.delta;
        record.action = "smoothed";

        // safety gate: the patched field must still be monotone
        {
            std::vector<std::uint8_t> strip_mask(g.node_count(), 0);
            for (int n : strip_nodes) strip_mask[n] = 1;
            std::vector<std::uint8_t> closure = strip_mask;
            auto dilate = [&](std::vector<std::uint8_t>& mask) {
                std::vector<std::uint8_t> out = mask;
                for (int n : g.nodes()) {
                    if (!mask[n]) continue;
                    const int i = g.node_i(n), j = g.node_j(n);
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int di = -1; di <= 1; ++di)
                            if (g.node_in(i + di, j + dj)) out[g.node_index(i + di, j + dj)] = 1;
                }
                mask.swap(out);
            };
            dilate(closure);  // strip closure
            std::vector<std::uint8_t> patch_mask = closure;
            dilate(patch_mask);  // plus a ring
            std::vector<std::uint8_t> core_mask(g.node_count(), 0);
            for (int n : g.nodes())
                if (!closure[n]) core_mask[n] = 1;
            ScalarField core(g.with_mask(std::move(core_mask)), smoothed.values());
            ScalarField patch(g.with_mask(std::move(patch_mask)), smoothed.values());
            GlueVerdict verdict = glue_strict_over(core, patch, 0.0,
                                                   MonotonicityMethod::LevelComponent);
            if (!verdict.monotone)
                throw MonotonicityViolationError(
                    "step3_smooth_all: smoothing broke monotonicity near level " +
                    std::to_string(job.level));
        }

        current = std::move(smoothed);
        for (int n : strip_nodes) claimed[n] = 1;
        report.curves.push_back(record);
    }

    const double sup = sup_distance(current, w);
    stage.energy_after = p_energy(current, p);
    stage.sup_dist_to_input = sup;
    stage.changed_nodes = count_changed(current, w);
    stage.monotone = is_monotone(current, MonotonicityMethod::LevelComponent, mono_tol).monotone;

    double max_strip_bound = 0.0;
    bool kink_ok = true;
    int smoothed_count = 0;
    for (const CurveRecord& c : report.curves) {
        if (c.action != "smoothed") continue;
        ++smoothed_count;
        report.kink_max_after = std::max(report.kink_max_after, c.kink_after);
        max_strip_bound = std::max(max_strip_bound, c.beta * (c.gamma + c.delta));
        if (c.case_name == to_string(SmoothingCase::TwoSided)) {
            if (!(c.kink_after < c.kink_before) || !(c.kink_after <= kink_tol)) kink_ok = false;
        }
    }
    stage.assertions.push_back(make_assert("w~ monotone", stage.monotone, 0, 0));
    stage.assertions.push_back(make_assert("sup stage3 <= max beta (gamma + delta)",
                                           sup <= max_strip_bound + 1e-12, sup,
                                           max_strip_bound));
    stage.assertions.push_back(
        make_assert("E_p(w~) <= E_p(w) + slack",
                    stage.energy_after <= stage.energy_before + cfg.energy_slack,
                    stage.energy_after, stage.energy_before + cfg.energy_slack));
    stage.assertions.push_back(make_assert("kink decreases on smoothed TwoSided interfaces",
                                           kink_ok, smoothed_count, 0));

    // support of the change: only claimed strip nodes may differ from w
    bool support_ok = true;
    for (int n : g.nodes())
        if (current[n] != w[n] && !claimed[n]) support_ok = false;
    stage.assertions.push_back(make_assert("change contained in strips", support_ok, 0, 0));

    Step3Result out{std::move(current), std::move(report)};
    out.report.stages.push_back(std::move(stage));
    return out;
}

ApproximateResult approximate(const ScalarField& u, double eps, double p,
                              const PipelineConfig& cfg) {
    if (!(eps > 0)) throw Error("approximate: eps must be positive");
    const double delta = eps / 6.0;
    const double eta = eps / 24.0;

    Step1Result s1 = step1_band_replace(u, delta, p, cfg);
    if (s1.partition.levels.empty()) {
        // degenerate (nearly constant) input: nothing to do downstream
        ApproximateResult out{s1.field, std::move(s1.report), s1.field, s1.field};
        out.report.assertions.push_back(make_assert("sup|out - u| < eps",
                                                    sup_distance(out.field, u) < eps,
                                                    sup_distance(out.field, u), eps));
        return out;
    }

    Step2Result s2 = step2_lens_replace(s1.field, eta, s1.partition.levels, p, cfg);

    PipelineConfig cfg3 = cfg;
    cfg3.sup_budget = eps / 6.0;
    Step3Result s3 = step3_smooth_all(s2.field, s1.field, s2.lens, p, -1.0, cfg3);

    ApproxReport report;
    report.p = p;
    for (auto& r : s1.report.stages) report.stages.push_back(std::move(r));
    for (auto& r : s2.report.stages) report.stages.push_back(std::move(r));
    for (auto& r : s3.report.stages) report.stages.push_back(std::move(r));
    report.curves = std::move(s3.report.curves);
    report.kink_tolerance = s3.report.kink_tolerance;
    report.kink_max_after = s3.report.kink_max_after;

    const double lp = std::max(p, 1.0 + 1e-9);
    report.stages[1].sup_dist_to_original = sup_distance(s2.field, u);
    report.stages[1].lp_grad_dist_to_original = lp_grad_distance(s2.field, u, lp);
    report.stages[2].sup_dist_to_original = sup_distance(s3.field, u);
    report.stages[2].lp_grad_dist_to_original = lp_grad_distance(s3.field, u, lp);

    const ScalarField& result = s3.field;
    const double sup = sup_distance(result, u);
    const double grad_dist = lp_grad_distance(result, u, std::max(p, 1.0 + 1e-9));
    const double e_u = p_energy(u, p);
    const double e_out = p_energy(result, p);
    const double range = u.range();
    const double mono_tol = cfg.mono_tol_rel * std::max(range, 1e-300);
    const bool monotone =
        is_monotone(result, MonotonicityMethod::LevelComponent, mono_tol).monotone;

    report.sup_dist_total = sup;
    report.lp_grad_dist_total = grad_dist;
    report.assertions.push_back(make_assert("sup|out - u| < eps", sup < eps, sup, eps));
    report.assertions.push_back(
        make_assert("E_p(out) <= E_p(u)", e_out <= e_u + cfg.energy_slack, e_out, e_u));
    report.assertions.push_back(make_assert("out monotone", monotone, 0, 0));

    // change support: bands of u, lenses of v, and the smoothing strips
    std::vector<std::uint8_t> allowed(u.grid().node_count(), 0);
    for (const auto& band : s1.partition.bands)
        for (int n : band) allowed[n] = 1;
    for (const auto& lens_nodes : s2.lens.lenses)
        for (int n : lens_nodes) allowed[n] = 1;
    for (int n : u.grid().nodes())
        if (s3.field[n] != s2.field[n]) allowed[n] = 1;
    bool support_ok = true;
    for (int n : u.grid().nodes())
        if (result[n] != u[n] && !allowed[n]) support_ok = false;
    report.assertions.push_back(make_assert("change support in bands/lenses/strips",
                                            support_ok, 0, 0));

    // fraction of the domain where the output is a Dirichlet-solve output
    {
        std::vector<std::uint8_t> solved(u.grid().node_count(), 0);
        for (const auto& band : s1.partition.bands)
            for (int n : band) solved[n] = 1;
        for (const auto& lens_nodes : s2.lens.lenses)
            for (int n : lens_nodes) solved[n] = 1;
        int numerator = 0;
        for (int n : u.grid().nodes())
            if (solved[n] && result[n] == s2.field[n]) ++numerator;
        report.p_harmonic_fraction =
            static_cast<double>(numerator) / static_cast<double>(u.grid().nodes().size());
    }

    ApproximateResult out{std::move(s3.field), std::move(report), std::move(s1.field),
                          std::move(s2.field)};
    return out;
}

}  // namespace monofield
