#include "monofield/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace monofield {

DomainGrid::DomainGrid(int nx, int ny, double h, double x0, double y0,
                       std::vector<std::uint8_t> node_mask)
    : nx_(nx), ny_(ny), h_(h), x0_(x0), y0_(y0), node_mask_(std::move(node_mask)) {
    if (nx_ < 3 || ny_ < 3) throw Error("DomainGrid: need nx >= 3 and ny >= 3");
    if (!(h_ > 0.0)) throw Error("DomainGrid: need h > 0");
    if (static_cast<int>(node_mask_.size()) != nx_ * ny_)
        throw Error("DomainGrid: node mask size does not match nx*ny");

    cell_mask_.assign(cell_count(), 0);
    boundary_node_.assign(node_count(), 0);
    boundary_cell_.assign(cell_count(), 0);

    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const int n = node_index(i, j);
            if (!node_mask_[n]) continue;
            nodes_.push_back(n);
            const bool interior = node_in(i - 1, j) && node_in(i + 1, j) &&
                                  node_in(i, j - 1) && node_in(i, j + 1);
            if (!interior) {
                boundary_node_[n] = 1;
                boundary_nodes_.push_back(n);
            }
        }
    }
    if (nodes_.empty()) throw Error("DomainGrid: mask has no nodes");

    for (int j = 0; j < ny_ - 1; ++j) {
        for (int i = 0; i < nx_ - 1; ++i) {
            const int c = cell_index(i, j);
            if (node_in(i, j) && node_in(i + 1, j) && node_in(i, j + 1) && node_in(i + 1, j + 1)) {
                cell_mask_[c] = 1;
                cells_.push_back(c);
            }
        }
    }
    for (int j = 0; j < ny_ - 1; ++j) {
        for (int i = 0; i < nx_ - 1; ++i) {
            const int c = cell_index(i, j);
            if (!cell_mask_[c]) continue;
            const bool inner = cell_in(i - 1, j) && cell_in(i + 1, j) &&
                               cell_in(i, j - 1) && cell_in(i, j + 1);
            if (!inner) boundary_cell_[c] = 1;
        }
    }

    cell_interior_node_.assign(node_count(), 0);
    for (int j = 1; j < ny_ - 1; ++j) {
        for (int i = 1; i < nx_ - 1; ++i) {
            const int n = node_index(i, j);
            if (!node_mask_[n]) continue;
            if (cell_in(i - 1, j - 1) && cell_in(i, j - 1) && cell_in(i - 1, j) && cell_in(i, j))
                cell_interior_node_[n] = 1;
        }
    }

    // Flood the unmasked complement from the lattice frame; anything unmasked
    // left unreached is a hole.
    std::vector<std::uint8_t> seen(node_count(), 0);
    std::deque<int> queue;
    auto push_out = [&](int i, int j) {
        if (i < 0 || i >= nx_ || j < 0 || j >= ny_) return;
        const int n = node_index(i, j);
        if (seen[n] || node_mask_[n]) return;
        seen[n] = 1;
        queue.push_back(n);
    };
    for (int i = 0; i < nx_; ++i) {
        push_out(i, 0);
        push_out(i, ny_ - 1);
    }
    for (int j = 0; j < ny_; ++j) {
        push_out(0, j);
        push_out(nx_ - 1, j);
    }
    while (!queue.empty()) {
        const int n = queue.front();
        queue.pop_front();
        const int i = node_i(n), j = node_j(n);
        push_out(i - 1, j);
        push_out(i + 1, j);
        push_out(i, j - 1);
        push_out(i, j + 1);
    }
    for (int n = 0; n < node_count(); ++n) {
        if (!node_mask_[n] && !seen[n]) {
            has_holes_ = true;
            break;
        }
    }
}

std::shared_ptr<const DomainGrid> DomainGrid::rectangle(int nx, int ny, double h,
                                                        double x0, double y0) {
    return std::make_shared<DomainGrid>(nx, ny, h, x0, y0,
                                        std::vector<std::uint8_t>(nx * ny, 1));
}

std::shared_ptr<const DomainGrid> DomainGrid::from_predicate(
    int nx, int ny, double h, double x0, double y0,
    const std::function<bool(double, double)>& inside) {
    std::vector<std::uint8_t> mask(nx * ny, 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mask[j * nx + i] = inside(x0 + i * h, y0 + j * h) ? 1 : 0;
    return std::make_shared<DomainGrid>(nx, ny, h, x0, y0, std::move(mask));
}

std::shared_ptr<const DomainGrid> DomainGrid::with_mask(
    std::vector<std::uint8_t> node_mask) const {
    return std::make_shared<DomainGrid>(nx_, ny_, h_, x0_, y0_, std::move(node_mask));
}

bool DomainGrid::same_geometry(const DomainGrid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && h_ == o.h_ && x0_ == o.x0_ && y0_ == o.y0_;
}

bool DomainGrid::operator==(const DomainGrid& o) const {
    return same_geometry(o) && node_mask_ == o.node_mask_;
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_->node_count())
        throw Error("ScalarField: value array size does not match grid");
    for (int n : grid_->nodes()) {
        if (!std::isfinite(values_[n])) {
            std::ostringstream msg;
            msg << "ScalarField: non-finite value at node (" << grid_->node_i(n) << ", "
                << grid_->node_j(n) << ")";
            throw Error(msg.str());
        }
    }
}

double ScalarField::min() const {
    double m = values_[grid_->nodes().front()];
    for (int n : grid_->nodes()) m = std::min(m, values_[n]);
    return m;
}

double ScalarField::max() const {
    double m = values_[grid_->nodes().front()];
    for (int n : grid_->nodes()) m = std::max(m, values_[n]);
    return m;
}

VectorField::VectorField(GridPtr grid, std::vector<double> gx, std::vector<double> gy)
    : grid_(std::move(grid)), gx_(std::move(gx)), gy_(std::move(gy)) {
    if (static_cast<int>(gx_.size()) != grid_->cell_count() ||
        static_cast<int>(gy_.size()) != grid_->cell_count())
        throw Error("VectorField: component array size does not match grid");
}

double VectorField::norm(int c) const { return std::hypot(gx_[c], gy_[c]); }

ScalarField sample_analytic(const std::function<double(double, double)>& f, GridPtr grid) {
    std::vector<double> values(grid->node_count(),
                               std::numeric_limits<double>::quiet_NaN());
    for (int n : grid->nodes()) {
        const double v = f(grid->node_x(n), grid->node_y(n));
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "sample_analytic: non-finite sample at node (" << grid->node_i(n) << ", "
                << grid->node_j(n) << ") = (" << grid->node_x(n) << ", " << grid->node_y(n)
                << ")";
            throw Error(msg.str());
        }
        values[n] = v;
    }
    return ScalarField(std::move(grid), std::move(values));
}

VectorField gradient(const ScalarField& field) {
    const DomainGrid& g = field.grid();
    std::vector<double> gx(g.cell_count(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> gy(g.cell_count(), std::numeric_limits<double>::quiet_NaN());
    const double inv2h = 1.0 / (2.0 * g.h());
    for (int c : g.cells()) {
        const int i = g.cell_i(c), j = g.cell_j(c);
        const double v00 = field.at(i, j);
        const double v10 = field.at(i + 1, j);
        const double v01 = field.at(i, j + 1);
        const double v11 = field.at(i + 1, j + 1);
        gx[c] = (v10 - v00 + v11 - v01) * inv2h;
        gy[c] = (v01 - v00 + v11 - v10) * inv2h;
    }
    return VectorField(field.grid_ptr(), std::move(gx), std::move(gy));
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (a.grid_ptr() == b.grid_ptr()) return;
    if (!(a.grid() == b.grid()))
        throw GridMismatchError("fields live on different grids");
}

double sup_distance(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    double m = 0.0;
    for (int n : a.grid().nodes()) m = std::max(m, std::abs(a[n] - b[n]));
    return m;
}

double lp_grad_distance(const ScalarField& a, const ScalarField& b, double p) {
    require_same_grid(a, b);
    if (!(p > 1.0) || !std::isfinite(p))
        throw Error("lp_grad_distance: need 1 < p < infinity");
    const VectorField ga = gradient(a);
    const VectorField gb = gradient(b);
    const double h2 = a.grid().h() * a.grid().h();
    double sum = 0.0;
    for (int c : a.grid().cells()) {
        const double dx = ga.gx(c) - gb.gx(c);
        const double dy = ga.gy(c) - gb.gy(c);
        sum += std::pow(std::hypot(dx, dy), p) * h2;
    }
    return std::pow(sum, 1.0 / p);
}

std::vector<std::vector<int>> label_components(const DomainGrid& grid,
                                               const std::vector<std::uint8_t>& in_set) {
    std::vector<std::vector<int>> components;
    std::vector<std::uint8_t> seen(grid.node_count(), 0);
    std::deque<int> queue;
    for (int start : grid.nodes()) {
        if (!in_set[start] || seen[start]) continue;
        components.emplace_back();
        std::vector<int>& comp = components.back();
        seen[start] = 1;
        queue.push_back(start);
        while (!queue.empty()) {
            const int n = queue.front();
            queue.pop_front();
            comp.push_back(n);
            const int i = grid.node_i(n), j = grid.node_j(n);
            const int neighbors[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& ij : neighbors) {
                if (!grid.node_in(ij[0], ij[1])) continue;
                const int m = grid.node_index(ij[0], ij[1]);
                if (seen[m] || !in_set[m]) continue;
                seen[m] = 1;
                queue.push_back(m);
            }
        }
        std::sort(comp.begin(), comp.end());
    }
    return components;
}

}  // namespace monofield
