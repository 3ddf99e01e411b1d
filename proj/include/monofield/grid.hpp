#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "monofield/errors.hpp"

namespace monofield {

/// Rectangular lattice with a node/cell mask encoding an open planar set and
/// its staircase boundary.
///
/// Nodes are indexed row-major: node (i, j) lives at index j*nx + i and at
/// coordinates (x0 + i*h, y0 + j*h). Cells are indexed the same way over an
/// (nx-1) x (ny-1) lattice; cell (i, j) has corner nodes (i,j), (i+1,j),
/// (i,j+1), (i+1,j+1). A cell is masked iff all four corners are masked.
///
/// Boundary nodes are masked nodes with at least one unmasked 4-neighbor
/// (neighbors outside the lattice count as unmasked); they are the discrete
/// trace of the boundary of the set.
class DomainGrid {
public:
    DomainGrid(int nx, int ny, double h, double x0, double y0,
               std::vector<std::uint8_t> node_mask);

    /// Fully masked rectangle.
    static std::shared_ptr<const DomainGrid> rectangle(int nx, int ny, double h,
                                                       double x0, double y0);

    /// Mask defined by a predicate on node coordinates.
    static std::shared_ptr<const DomainGrid> from_predicate(
        int nx, int ny, double h, double x0, double y0,
        const std::function<bool(double, double)>& inside);

    /// Same geometry, different node mask (used for sub-domains such as band
    /// components or smoothing strips).
    std::shared_ptr<const DomainGrid> with_mask(std::vector<std::uint8_t> node_mask) const;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }

    int node_count() const { return nx_ * ny_; }
    int cell_count() const { return (nx_ - 1) * (ny_ - 1); }

    int node_index(int i, int j) const { return j * nx_ + i; }
    int cell_index(int i, int j) const { return j * (nx_ - 1) + i; }
    int node_i(int n) const { return n % nx_; }
    int node_j(int n) const { return n / nx_; }
    int cell_i(int c) const { return c % (nx_ - 1); }
    int cell_j(int c) const { return c / (nx_ - 1); }

    double node_x(int n) const { return x0_ + node_i(n) * h_; }
    double node_y(int n) const { return y0_ + node_j(n) * h_; }

    bool node_in(int i, int j) const {
        return i >= 0 && i < nx_ && j >= 0 && j < ny_ && node_mask_[node_index(i, j)];
    }
    bool node_in(int n) const { return node_mask_[n] != 0; }
    bool cell_in(int c) const { return cell_mask_[c] != 0; }
    bool cell_in(int i, int j) const {
        return i >= 0 && i < nx_ - 1 && j >= 0 && j < ny_ - 1 && cell_mask_[cell_index(i, j)];
    }

    bool is_boundary_node(int n) const { return boundary_node_[n] != 0; }

    /// Masked cell with an unmasked (or off-lattice) 4-neighbor cell.
    bool is_boundary_cell(int c) const { return boundary_cell_[c] != 0; }

    /// Node whose four incident cells all exist and are masked; these are the
    /// nodes interior to the union of masked cells.
    bool is_cell_interior_node(int n) const { return cell_interior_node_[n] != 0; }

    const std::vector<std::uint8_t>& node_mask() const { return node_mask_; }
    const std::vector<std::uint8_t>& cell_mask() const { return cell_mask_; }

    /// Indices of masked nodes, ascending.
    const std::vector<int>& nodes() const { return nodes_; }
    /// Indices of masked cells, ascending.
    const std::vector<int>& cells() const { return cells_; }
    /// Indices of boundary nodes, ascending.
    const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }

    /// True when some unmasked node is enclosed by the mask (not reachable
    /// from the lattice frame through unmasked nodes).
    bool has_holes() const { return has_holes_; }

    bool same_geometry(const DomainGrid& o) const;
    bool operator==(const DomainGrid& o) const;

private:
    int nx_, ny_;
    double h_, x0_, y0_;
    std::vector<std::uint8_t> node_mask_;
    std::vector<std::uint8_t> cell_mask_;
    std::vector<std::uint8_t> boundary_node_;
    std::vector<std::uint8_t> boundary_cell_;
    std::vector<std::uint8_t> cell_interior_node_;
    std::vector<int> nodes_;
    std::vector<int> cells_;
    std::vector<int> boundary_nodes_;
    bool has_holes_ = false;
};

using GridPtr = std::shared_ptr<const DomainGrid>;

/// Real values on the masked nodes of a DomainGrid. Values outside the mask
/// are stored as NaN and must never be read.
class ScalarField {
public:
    ScalarField(GridPtr grid, std::vector<double> values);

    const DomainGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    double operator[](int n) const { return values_[n]; }
    double& operator[](int n) { return values_[n]; }
    double at(int i, int j) const { return values_[grid_->node_index(i, j)]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double min() const;
    double max() const;
    double range() const { return max() - min(); }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Cell-centered gradient components on the masked cells of a DomainGrid.
class VectorField {
public:
    VectorField(GridPtr grid, std::vector<double> gx, std::vector<double> gy);

    const DomainGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    double gx(int c) const { return gx_[c]; }
    double gy(int c) const { return gy_[c]; }
    double norm(int c) const;

    const std::vector<double>& gx() const { return gx_; }
    const std::vector<double>& gy() const { return gy_; }

private:
    GridPtr grid_;
    std::vector<double> gx_, gy_;
};

/// Samples f at every masked node. Throws Error with the node location if a
/// sample is not finite.
ScalarField sample_analytic(const std::function<double(double, double)>& f, GridPtr grid);

/// Cell-centered gradient: per masked cell the average of the two forward
/// differences in each direction, divided by h. Exact for affine fields.
VectorField gradient(const ScalarField& field);

/// max over masked nodes of |a-b|. Throws GridMismatchError on different grids.
double sup_distance(const ScalarField& a, const ScalarField& b);

/// (sum over masked cells of |grad a - grad b|^p h^2)^(1/p), 1 < p < infinity.
double lp_grad_distance(const ScalarField& a, const ScalarField& b, double p);

void require_same_grid(const ScalarField& a, const ScalarField& b);

/// Labels the 4-connected components of the node set `in_set` (one flag per
/// node of `grid`, nonzero = in the set). Returns one sorted node list per
/// component, ordered by smallest node index. Only masked nodes are visited.
std::vector<std::vector<int>> label_components(const DomainGrid& grid,
                                               const std::vector<std::uint8_t>& in_set);

}  // namespace monofield
