#pragma once

#include <string>
#include <vector>

#include "monofield/grid.hpp"
#include "monofield/partition.hpp"
#include "monofield/pharmonic.hpp"

namespace monofield {

struct PipelineConfig {
    double solver_tol = 1e-8;
    int solver_max_iter = 200;
    double eps_reg_initial = -1.0;
    int eps_reg_stages = 4;

    double glue_tol_rel = 1e-7;   // gluing tolerance, relative to the field range
    double mono_tol_rel = 1e-7;   // monotonicity check tolerance, relative
    double safety = 0.1;          // smoothing profile safety margin
    double kink_tol_rel = 0.05;   // kink threshold, relative to max |grad|
    double energy_slack = 0.0;    // allowed stage-3 energy increase
    double sup_budget = -1.0;     // cap on the per-strip sup change (< 0: none)
    int level_budget = 64;        // candidates per level search
    double lens_grad_floor_rel = 1e-4;  // critical-cell rejection for lens levels
    bool strict_strips = false;   // error instead of skip on infeasible strips
};

struct Assertion {
    std::string name;
    bool pass = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct StageReport {
    std::string name;
    double sup_dist_to_input = 0.0;     // vs the stage input
    double sup_dist_to_original = 0.0;  // vs the pipeline's original field
    double lp_grad_dist_to_original = 0.0;
    double energy_before = 0.0;
    double energy_after = 0.0;
    bool monotone = false;
    int changed_nodes = 0;
    std::vector<double> levels;  // schedule used by the stage, if any
    std::vector<Assertion> assertions;
};

/// Per-curve record of the smoothing stage.
struct CurveRecord {
    int lens = -1;
    double level = 0.0;
    int component = 0;
    std::string action;     // "smoothed" or "skipped-<reason>"
    std::string case_name;
    double kink_before = 0.0;
    double kink_after = 0.0;
    double beta = 0.0, gamma = 0.0, delta = 0.0;
};

struct ApproxReport {
    double p = 2.0;
    std::vector<StageReport> stages;
    std::vector<CurveRecord> curves;
    double p_harmonic_fraction = 0.0;
    double kink_tolerance = 0.0;
    double kink_max_after = 0.0;  // max jump of the normal derivative across
                                  // the smoothed interfaces
    double sup_dist_total = 0.0;
    double lp_grad_dist_total = 0.0;
    std::vector<Assertion> assertions;  // end-to-end assertions

    bool all_pass() const;
    std::string to_json() const;
};

struct Step1Result {
    ScalarField field;
    ApproxReport report;
    BandPartition partition;
};

struct Step2Result {
    ScalarField field;
    ApproxReport report;
    LensPartition lens;
};

struct Step3Result {
    ScalarField field;
    ApproxReport report;
};

/// Picks a regular level schedule with gaps below delta, solves the
/// p-Dirichlet problem on every band component with the field's own trace as
/// data, and glues. The report asserts sup|u_d - u| < 2 delta, the energy
/// decrease, monotonicity, per-band value ranges, and the band containment of
/// the output's level regions.
Step1Result step1_band_replace(const ScalarField& u, double delta, double p,
                               const PipelineConfig& cfg = {});

/// Places a lens (t_j^-, t_j^+) of width below eta strictly between
/// neighboring original levels around each t_j, rejecting candidate levels
/// whose curves pass through cells with a vanishing gradient, then solves and
/// glues as in step 1 with v as the reference.
Step2Result step2_lens_replace(const ScalarField& v, double eta,
                               const std::vector<double>& original_levels, double p,
                               const PipelineConfig& cfg = {});

/// Smooths w along every component of v^{-1}(t_j^+-) with the interpolation
/// kernels, using pairwise disjoint strips. Curves whose strips do not fit at
/// this resolution (closer than 4h to another curve or to themselves) are
/// skipped with a record unless strict_strips is set; curves whose measured
/// kink is already below the kink tolerance are identity-skipped. strip_cap
/// bounds the strip half-width (< 0: chart-limited only).
Step3Result step3_smooth_all(const ScalarField& w, const ScalarField& v,
                             const LensPartition& lens, double p, double strip_cap,
                             const PipelineConfig& cfg = {});

/// Runs the three stages with budgets delta = eps/6, eta = eps/24 and the
/// per-strip sup change capped at eps/6. The final report asserts
/// sup|out - u| < eps, the energy decrease, monotonicity, and the support of
/// the change; it reports the Sobolev-distance and the p-harmonic area
/// fraction.
struct ApproximateResult {
    ScalarField field;
    ApproxReport report;
    ScalarField stage1;  // u_delta
    ScalarField stage2;  // w
};

ApproximateResult approximate(const ScalarField& u, double eps, double p,
                              const PipelineConfig& cfg = {});

}  // namespace monofield
