#pragma once

#include <string>
#include <utility>
#include <vector>

#include "monofield/grid.hpp"

namespace monofield {

/// Discrete p-Dirichlet energy: sum over masked cells of |grad v|^p h^2,
/// with the same cell-centered gradient used everywhere else. p >= 1.
double p_energy(const ScalarField& field, double p);

struct EnergyReport {
    double p = 2.0;
    double energy = 0.0;     // unregularized energy over the solve cells
    int iterations = 0;      // Newton steps across all continuation stages
    double grad_norm = 0.0;  // final stationarity residual, max |dE/dv| / h^2
    bool converged = false;
    std::string to_json() const;
};

/// One p-Dirichlet problem on a region of a grid: minimize the discrete
/// p-energy over the region's node values with the interface values fixed.
///
/// The interface is the set of masked nodes sharing a cell with the region
/// but not in it; boundary_data must assign a value to each interface node.
/// The energy runs over the masked cells with at least one region corner.
struct DirichletProblemSpec {
    GridPtr grid;
    std::vector<int> region;                           // free node indices
    std::vector<std::pair<int, double>> boundary_data; // (interface node, value)
    double p = 2.0;             // 1 < p < infinity
    double tol = 1e-8;          // stationarity tolerance (relative, see solver)
    int max_iter = 200;         // Newton iteration budget per continuation stage
    double eps_reg = -1.0;      // initial gradient regularization; < 0 chooses
                                // 1e-2 * (data range) / h
    double eps_reg_final = -1.0;  // last continuation stage; < 0 chooses
                                  // 1e-8 * (data range) / h
    int eps_stages = 4;         // geometric continuation stages
};

/// Minimizes the discrete p-energy. p = 2 needs a single linear solve; p != 2
/// replaces |grad v| by sqrt(|grad v|^2 + eps^2) inside the p-th power and
/// runs damped Newton with backtracking, driving eps down geometrically.
///
/// The returned field lives on the region-plus-interface sub-grid. Its
/// unregularized energy never exceeds the warm start's (the warm start itself
/// is returned when iteration cannot improve on it). Default warm start is
/// the interface mean.
std::pair<ScalarField, EnergyReport> dirichlet_solve(const DirichletProblemSpec& spec,
                                                     const ScalarField* warm_start = nullptr);

struct ComparisonVerdict {
    bool bounds_ok = false;   // min data - tol <= v <= max data + tol on the region
    bool monotone = false;    // maximum-principle consequence
    double data_min = 0.0;
    double data_max = 0.0;
    double overshoot = 0.0;   // worst excursion beyond [data_min, data_max]
    bool ok() const { return bounds_ok && monotone; }
};

/// Checks the comparison principle on a solve output.
ComparisonVerdict comparison_check(const ScalarField& solution,
                                   const DirichletProblemSpec& spec, double tol);

}  // namespace monofield
