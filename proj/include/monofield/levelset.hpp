#pragma once

#include <functional>
#include <string>
#include <vector>

#include "monofield/grid.hpp"

namespace monofield {

enum class CurveClass { Point, JordanCurve, Arc, Degenerate };

std::string to_string(CurveClass c);

/// One polyline component of a level set u^{-1}(t).
struct LevelCurve {
    std::vector<double> xs;  // ordered crossing coordinates
    std::vector<double> ys;
    bool closed = false;            // closed => first point == last point
    bool touches_boundary = false;  // an endpoint lies in a boundary cell
    double length = 0.0;            // sum of segment lengths
    CurveClass classification = CurveClass::Degenerate;

    int size() const { return static_cast<int>(xs.size()); }
    double diameter() const;  // max pairwise vertex distance
};

struct JunctionCell {
    int cell = -1;
    int incident_segments = 0;  // >= 3, or 4 for a cell whose corners all sit on the level
};

/// The extracted level set at one value t: polyline components with their
/// topological class, junction diagnostics, and total Hausdorff-1 measure
/// proxy (polyline length).
struct LevelSetAnalysis {
    double t = 0.0;
    double snap = 0.0;  // node values within snap of t were perturbed to t + snap
    std::vector<LevelCurve> components;
    std::vector<JunctionCell> junctions;
    double total_length = 0.0;

    bool is_manifold() const { return junctions.empty(); }
    bool all_regular() const;  // no junctions, no Degenerate components
    std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Marching squares on masked cells, linear interpolation along cell edges.
//
// Corner order inside a cell:
//     01 -- 11
//      |     |
//     00 -- 10
//
// Node values within snap = 1e-12 * range of t are perturbed to t + snap
// before extraction, so no corner ever sits exactly on the level and every
// cell produces an even number of edge crossings. The ambiguous saddle cell
// (diagonal corners on opposite sides) is resolved by the sign of the
// bilinear interpolant at the cell center. Crossings on shared edges are
// computed once, so chains match exactly across cells.
//
// Junction cells are recorded when
//   - all four corners of a masked cell sit within snap of t, or
//   - a snapped node has three or more snapped 4-neighbors (crossing level
//     lines running through lattice nodes), or
//   - three or more segments meet at one edge crossing.
// Components whose chain touches a junction cell are classified Degenerate.
//
// Classification: components shorter than 2h without boundary contact are
// Point; closed chains are JordanCurve; open chains with both endpoints in
// boundary cells are Arc; anything else is Degenerate.
// ---------------------------------------------------------------------------
LevelSetAnalysis extract_level_set(const ScalarField& field, double t);

/// Total polyline length of the analysis.
double hausdorff1_length(const LevelSetAnalysis& analysis);

/// Both sides of the co-area identity: lhs integrates the level-set length
/// over n_levels midpoint values in (min u, max u), rhs sums |grad u| h^2
/// over masked cells.
struct CoareaReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_error = 0.0;  // |lhs-rhs| / max(rhs, floor)
    int n_levels = 0;
    std::string to_json() const;
};

CoareaReport coarea_check(const ScalarField& field, int n_levels);

/// For each target value, searches t in [target-jitter, target+jitter] along
/// a deterministic low-discrepancy sequence until extract_level_set(t) has no
/// junctions and no Degenerate components and t is not within snap tolerance
/// of a local extremal value. Returns the adjusted, strictly increasing
/// schedule. Throws SearchExhaustedError after `budget` candidates per target.
/// An optional extra predicate can reject candidates on top of the regularity
/// rules (e.g. levels whose curves graze low-gradient cells).
using LevelPredicate = std::function<bool(double, const LevelSetAnalysis&)>;
std::vector<double> select_regular_levels(const ScalarField& field,
                                          const std::vector<double>& targets, double jitter,
                                          int budget = 64,
                                          const LevelPredicate& extra_accept = {});

/// Contour CSV: header "component,vertex,x,y".
void write_contours_csv(const LevelSetAnalysis& analysis, std::ostream& out);

}  // namespace monofield
