#pragma once

#include <map>
#include <string>
#include <vector>

#include "monofield/grid.hpp"
#include "monofield/partition.hpp"

namespace monofield {

enum class MonotonicityMethod { ExhaustiveWindow, LevelComponent };

std::string to_string(MonotonicityMethod m);

/// An axis-aligned window [i0,i1] x [j0,j1] of masked nodes whose interior
/// extremum beats the window-boundary extremum by more than the tolerance.
struct MonotonicityWitness {
    int i0 = 0, j0 = 0, i1 = 0, j1 = 0;
    bool is_max = false;       // interior maximum above boundary maximum
    int node = -1;             // offending interior node
    double interior_value = 0.0;
    double boundary_extremum = 0.0;
    std::string describe(const DomainGrid& g) const;
};

struct MonotonicityReport {
    bool monotone = false;
    MonotonicityMethod method = MonotonicityMethod::LevelComponent;
    double tolerance = 0.0;
    std::vector<MonotonicityWitness> witnesses;
    std::string to_json(const DomainGrid& g) const;
};

/// Default tolerance: 1e-9 times the field range.
double default_monotonicity_tolerance(const ScalarField& field);

/// Decides Lebesgue monotonicity.
///
/// ExhaustiveWindow compares interior against window-boundary extrema over
/// every axis-aligned rectangle of masked nodes with at least one interior
/// node; O(n^4)-ish, meant for small grids. LevelComponent sweeps the
/// thresholds t = node values +- tolerance and requires every component of
/// {u > t} and {u < t} (4-connectivity) to reach a boundary node of the
/// domain; on masks with holes a component is also accepted when it encloses
/// an out-of-domain node. Compact components are converted into window
/// witnesses and verified against the tolerance.
MonotonicityReport is_monotone(const ScalarField& field,
                               MonotonicityMethod method = MonotonicityMethod::LevelComponent,
                               double tolerance = -1.0);

/// Window witnesses are rectangles whose interior attains (within tolerance)
/// the window extremum.
MonotonicityReport is_strictly_monotone(const ScalarField& field, double tolerance = -1.0);

/// Values u(n) at nodes whose full 8-neighborhood is masked and all <= u(n)
/// (local max) or all >= u(n) (local min); sorted, exact duplicates collapsed.
std::vector<double> local_extremal_values(const ScalarField& field);

/// Replaces u on each band component by the supplied field and re-checks the
/// gluing preconditions:
///   (ii)  the replacement matches u within tolerance on the component's
///         interface nodes (the in-domain nodes sharing a cell with the
///         component but not in it), and
///   (iii) t_i - tolerance <= replacement <= t_{i+1} + tolerance on the
///         component.
/// If u was monotone and the glued field is not, the glue is rejected with
/// MonotonicityViolationError instead of being returned.
ScalarField glue_on_bands(const ScalarField& u, const BandPartition& partition,
                          const std::map<BandComponentKey, ScalarField>& replacements,
                          double tolerance);

/// Interface nodes of a node set: masked nodes sharing a cell (8-neighborhood)
/// with the set but not in it.
std::vector<int> interface_nodes(const DomainGrid& grid, const std::vector<int>& region);

struct GlueVerdict {
    bool monotone = false;
    MonotonicityReport report;
};

/// Safety gate for patched fields: core covers the domain minus a closed set,
/// patch covers that set plus a one-node ring. Checks containment and overlap
/// agreement, then runs is_monotone on the combined field.
GlueVerdict glue_strict_over(const ScalarField& core, const ScalarField& patch,
                             double overlap_tolerance = 0.0,
                             MonotonicityMethod method = MonotonicityMethod::LevelComponent);

}  // namespace monofield
