#include "monofield/pharmonic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "monofield/monotonicity.hpp"

namespace monofield {

using nlohmann::json;

double p_energy(const ScalarField& field, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw Error("p_energy: need 1 <= p < infinity");
    const VectorField grad = gradient(field);
    const double h2 = field.grid().h() * field.grid().h();
    double sum = 0.0;
    for (int c : field.grid().cells()) sum += std::pow(grad.norm(c), p) * h2;
    return sum;
}

std::string EnergyReport::to_json() const {
    json doc;
    doc["p"] = p;
    doc["energy"] = energy;
    doc["iterations"] = iterations;
    doc["grad_norm"] = grad_norm;
    doc["converged"] = converged;
    return doc.dump(2);
}

namespace {

// The official energy couples the four corners of each cell through
//   a = v10 + v11 - v00 - v01,   b = v01 + v11 - v00 - v10,
//   q = (a^2 + b^2) / (4 h^2) = |grad v|^2,
//   e = (q + eps^2)^(p/2) h^2.
// q is blind to the bilinear twist mode m = v00 - v10 - v01 + v11, so on
// staircase-clipped regions the raw minimizer develops O(h) hourglass bumps.
// The solver therefore minimizes the twist-stabilized integrand
//   q' = q + m^2 / (6 h^2),
// which for p = 2 is exactly the bilinear FEM energy (an M-matrix stencil,
// so the discrete maximum principle holds). Reported energies and the
// warm-start safeguard always use the raw q.
constexpr double kCoefA[4] = {-1.0, +1.0, -1.0, +1.0};  // corners 00,10,01,11
constexpr double kCoefB[4] = {-1.0, -1.0, +1.0, +1.0};
constexpr double kCoefM[4] = {+1.0, -1.0, -1.0, +1.0};

struct Solver {
    const DirichletProblemSpec& spec;
    const DomainGrid& g;
    double h, inv4h2, inv6h2;

    std::vector<int> free_of_node;      // node -> free index or -1
    std::vector<int> free_nodes;        // free index -> node
    std::vector<int> cells;             // solve cells
    std::vector<std::array<int, 4>> cell_nodes;
    std::vector<double> v;              // working values over the parent grid

    // per-cell cache at the current iterate
    std::vector<double> ca, cb, cm, cq;  // cq includes the twist term

    explicit Solver(const DirichletProblemSpec& s) : spec(s), g(*s.grid) {
        h = g.h();
        inv4h2 = 1.0 / (4.0 * h * h);
        inv6h2 = 1.0 / (6.0 * h * h);
    }

    void cache_cells() {
        for (size_t k = 0; k < cells.size(); ++k) {
            const auto& cn = cell_nodes[k];
            const double v00 = v[cn[0]], v10 = v[cn[1]], v01 = v[cn[2]], v11 = v[cn[3]];
            ca[k] = v10 + v11 - v00 - v01;
            cb[k] = v01 + v11 - v00 - v10;
            cm[k] = v00 - v10 - v01 + v11;
            cq[k] = (ca[k] * ca[k] + cb[k] * cb[k]) * inv4h2 + cm[k] * cm[k] * inv6h2;
        }
    }

    double raw_energy() const {
        const double h2 = h * h;
        double sum = 0.0;
        for (size_t k = 0; k < cells.size(); ++k) {
            const double q = (ca[k] * ca[k] + cb[k] * cb[k]) * inv4h2;
            sum += std::pow(q, 0.5 * spec.p) * h2;
        }
        return sum;
    }

    double energy(double eps2, double p) const {
        const double h2 = h * h;
        double sum = 0.0;
        for (size_t k = 0; k < cells.size(); ++k) sum += std::pow(cq[k] + eps2, 0.5 * p) * h2;
        return sum;
    }

    double energy_at(const std::vector<double>& trial, double eps2, double p) const {
        const double h2 = h * h;
        double sum = 0.0;
        for (size_t k = 0; k < cells.size(); ++k) {
            const auto& cn = cell_nodes[k];
            const double a = trial[cn[1]] + trial[cn[3]] - trial[cn[0]] - trial[cn[2]];
            const double b = trial[cn[2]] + trial[cn[3]] - trial[cn[0]] - trial[cn[1]];
            const double m = trial[cn[0]] - trial[cn[1]] - trial[cn[2]] + trial[cn[3]];
            const double q = (a * a + b * b) * inv4h2 + m * m * inv6h2;
            sum += std::pow(q + eps2, 0.5 * p) * h2;
        }
        return sum;
    }

    // d q' / d v_corner
    double dq(size_t k, int corner) const {
        return (ca[k] * kCoefA[corner] + cb[k] * kCoefB[corner]) * 2.0 * inv4h2 +
               cm[k] * kCoefM[corner] * 2.0 * inv6h2;
    }

    void gradient_vec(double eps2, double p, std::vector<double>& grad) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        const double h2 = h * h;
        for (size_t k = 0; k < cells.size(); ++k) {
            const double w = 0.5 * p * std::pow(cq[k] + eps2, 0.5 * p - 1.0) * h2;
            const auto& cn = cell_nodes[k];
            for (int corner = 0; corner < 4; ++corner) {
                const int f = free_of_node[cn[corner]];
                if (f < 0) continue;
                grad[f] += w * dq(k, corner);
            }
        }
    }

    void hessian_apply(double eps2, double p, const std::vector<double>& x,
                       std::vector<double>& y) const {
        std::fill(y.begin(), y.end(), 0.0);
        const double h2 = h * h;
        for (size_t k = 0; k < cells.size(); ++k) {
            const auto& cn = cell_nodes[k];
            double xs[4];
            for (int corner = 0; corner < 4; ++corner) {
                const int f = free_of_node[cn[corner]];
                xs[corner] = f >= 0 ? x[f] : 0.0;
            }
            const double ax = xs[1] + xs[3] - xs[0] - xs[2];
            const double bx = xs[2] + xs[3] - xs[0] - xs[1];
            const double mx = xs[0] - xs[1] - xs[2] + xs[3];
            const double base = std::pow(cq[k] + eps2, 0.5 * p - 1.0);
            const double curv = (cq[k] + eps2) > 0.0
                                    ? 0.25 * p * (p - 2.0) * base / (cq[k] + eps2) * h2
                                    : 0.0;
            const double lin_w = 0.5 * p * base * h2;
            // dq'(x) contracted with the direction
            const double dqx = (ca[k] * ax + cb[k] * bx) * 2.0 * inv4h2 +
                               cm[k] * mx * 2.0 * inv6h2;
            for (int corner = 0; corner < 4; ++corner) {
                const int f = free_of_node[cn[corner]];
                if (f < 0) continue;
                const double d2q = (kCoefA[corner] * ax + kCoefB[corner] * bx) * 2.0 * inv4h2 +
                                   kCoefM[corner] * mx * 2.0 * inv6h2;
                y[f] += curv * dqx * dq(k, corner) + lin_w * d2q;
            }
        }
    }

    void hessian_diag(double eps2, double p, std::vector<double>& diag) const {
        std::fill(diag.begin(), diag.end(), 0.0);
        const double h2 = h * h;
        for (size_t k = 0; k < cells.size(); ++k) {
            const auto& cn = cell_nodes[k];
            const double base = std::pow(cq[k] + eps2, 0.5 * p - 1.0);
            const double curv = (cq[k] + eps2) > 0.0
                                    ? 0.25 * p * (p - 2.0) * base / (cq[k] + eps2) * h2
                                    : 0.0;
            const double lin_w = 0.5 * p * base * h2;
            for (int corner = 0; corner < 4; ++corner) {
                const int f = free_of_node[cn[corner]];
                if (f < 0) continue;
                const double gk = dq(k, corner);
                const double d2q_kk = 2.0 * inv4h2 * 2.0 + 2.0 * inv6h2;
                diag[f] += curv * gk * gk + lin_w * d2q_kk;
            }
        }
    }

    // Jacobi-preconditioned CG on the (PSD) Newton system H d = -grad.
    int solve_newton_system(double eps2, double p, const std::vector<double>& grad,
                            std::vector<double>& d, double rtol, int max_cg) const {
        const size_t n = grad.size();
        std::vector<double> r(n), z(n), q(n), diag(n);
        hessian_diag(eps2, p, diag);
        for (size_t i = 0; i < n; ++i)
            diag[i] = diag[i] > 1e-300 ? diag[i] : 1.0;
        std::fill(d.begin(), d.end(), 0.0);
        for (size_t i = 0; i < n; ++i) r[i] = -grad[i];
        double rnorm0 = 0.0;
        for (size_t i = 0; i < n; ++i) rnorm0 = std::max(rnorm0, std::abs(r[i]));
        if (rnorm0 == 0.0) return 0;
        for (size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        std::vector<double> pdir = z;
        double rz = 0.0;
        for (size_t i = 0; i < n; ++i) rz += r[i] * z[i];
        int it = 0;
        for (; it < max_cg; ++it) {
            hessian_apply(eps2, p, pdir, q);
            double pq = 0.0;
            for (size_t i = 0; i < n; ++i) pq += pdir[i] * q[i];
            if (!(pq > 0)) break;  // flat direction; accept current d
            const double alpha = rz / pq;
            double rnorm = 0.0;
            for (size_t i = 0; i < n; ++i) {
                d[i] += alpha * pdir[i];
                r[i] -= alpha * q[i];
                rnorm = std::max(rnorm, std::abs(r[i]));
            }
            if (rnorm <= rtol * rnorm0) break;
            for (size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
            double rz_new = 0.0;
            for (size_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
            const double beta = rz_new / rz;
            rz = rz_new;
            for (size_t i = 0; i < n; ++i) pdir[i] = z[i] + beta * pdir[i];
        }
        return it;
    }
};

}  // namespace

std::pair<ScalarField, EnergyReport> dirichlet_solve(const DirichletProblemSpec& spec,
                                                     const ScalarField* warm_start) {
    if (!spec.grid) throw Error("dirichlet_solve: missing grid");
    if (spec.region.empty()) throw SolveError("dirichlet_solve: empty region");
    if (!(spec.p > 1.0) || !std::isfinite(spec.p))
        throw Error("dirichlet_solve: need 1 < p < infinity");

    const DomainGrid& g = *spec.grid;
    Solver solver(spec);

    solver.free_of_node.assign(g.node_count(), -1);
    for (int n : spec.region) {
        if (!g.node_in(n)) throw SolveError("dirichlet_solve: region node outside the mask");
        solver.free_of_node[n] = 0;  // provisional
    }

    const std::vector<int> interface = interface_nodes(g, spec.region);
    std::map<int, double> data;
    for (const auto& [n, value] : spec.boundary_data) {
        if (!std::isfinite(value))
            throw Error("dirichlet_solve: non-finite boundary value");
        data[n] = value;
    }
    for (int n : interface) {
        if (!data.count(n)) {
            std::ostringstream msg;
            msg << "dirichlet_solve: missing boundary value at interface node ("
                << g.node_i(n) << ", " << g.node_j(n) << ")";
            throw Error(msg.str());
        }
    }

    // reachability of every region node from the interface
    {
        std::deque<int> queue(interface.begin(), interface.end());
        std::vector<std::uint8_t> seen(g.node_count(), 0);
        for (int n : interface) seen[n] = 1;
        int reached = 0;
        while (!queue.empty()) {
            const int n = queue.front();
            queue.pop_front();
            const int i = g.node_i(n), j = g.node_j(n);
            const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& ij : nb) {
                if (!g.node_in(ij[0], ij[1])) continue;
                const int m = g.node_index(ij[0], ij[1]);
                if (seen[m] || solver.free_of_node[m] < 0) continue;
                seen[m] = 1;
                ++reached;
                queue.push_back(m);
            }
        }
        if (reached != static_cast<int>(spec.region.size()))
            throw SolveError("dirichlet_solve: region node not reachable from the interface");
    }

    // sub-grid mask and working values
    std::vector<std::uint8_t> mask(g.node_count(), 0);
    for (int n : spec.region) mask[n] = 1;
    for (int n : interface) mask[n] = 1;

    solver.v.assign(g.node_count(), std::numeric_limits<double>::quiet_NaN());
    double data_min = std::numeric_limits<double>::infinity(), data_max = -data_min;
    for (int n : interface) {
        solver.v[n] = data[n];
        data_min = std::min(data_min, data[n]);
        data_max = std::max(data_max, data[n]);
    }

    EnergyReport report;
    report.p = spec.p;

    // constant boundary data: the unique minimizer is that constant
    const double data_range = data_max - data_min;
    const double const_tol = 1e-14 * std::max(1.0, std::max(std::abs(data_min), std::abs(data_max)));
    if (data_range <= const_tol) {
        for (int n : spec.region) solver.v[n] = data_min;
        report.energy = 0.0;
        report.converged = true;
        return {ScalarField(g.with_mask(std::move(mask)), std::move(solver.v)), report};
    }

    double warm_fallback = 0.5 * (data_min + data_max);
    for (int n : spec.region) {
        double value = warm_fallback;
        if (warm_start) {
            if (!warm_start->grid().same_geometry(g) || !warm_start->grid().node_in(n))
                throw GridMismatchError("dirichlet_solve: warm start does not cover the region");
            value = (*warm_start)[n];
        }
        solver.v[n] = value;
    }

    // free numbering
    int nfree = 0;
    for (int n : spec.region) solver.free_of_node[n] = nfree++;
    solver.free_nodes = spec.region;

    // solve cells: masked cells with at least one region corner
    for (int c : g.cells()) {
        const int ci = g.cell_i(c), cj = g.cell_j(c);
        const int n00 = g.node_index(ci, cj);
        const std::array<int, 4> cn{n00, n00 + 1, n00 + g.nx(), n00 + g.nx() + 1};
        bool any_free = false, all_known = true;
        for (int n : cn) {
            if (solver.free_of_node[n] >= 0) any_free = true;
            if (!mask[n]) all_known = false;
        }
        if (any_free) {
            if (!all_known)
                throw SolveError("dirichlet_solve: boundary data does not close a solve cell");
            solver.cells.push_back(c);
            solver.cell_nodes.push_back(cn);
        }
    }
    solver.ca.resize(solver.cells.size());
    solver.cb.resize(solver.cells.size());
    solver.cm.resize(solver.cells.size());
    solver.cq.resize(solver.cells.size());

    const std::vector<double> warm_values = solver.v;
    solver.cache_cells();
    const double warm_energy = solver.raw_energy();

    // continuation schedule
    const double h = g.h();
    std::vector<double> eps_schedule;
    if (spec.p == 2.0) {
        eps_schedule.push_back(0.0);
    } else {
        const double eps_final =
            spec.eps_reg_final > 0 ? spec.eps_reg_final : 1e-8 * data_range / h;
        double eps0 = spec.eps_reg > 0 ? spec.eps_reg : 1e-2 * data_range / h;
        eps0 = std::max(eps0, eps_final);
        const int stages = std::max(1, spec.eps_stages);
        for (int s = 0; s < stages; ++s) {
            const double f = stages == 1 ? 1.0 : static_cast<double>(s) / (stages - 1);
            eps_schedule.push_back(eps0 * std::pow(eps_final / eps0, f));
        }
    }

    // stationarity threshold: tol scaled by the mean gradient magnitude of
    // the current iterate (a max over cells would let warm-start artifacts
    // inflate the scale)
    const double area = static_cast<double>(solver.cells.size()) * h * h;
    auto residual_scale = [&](double eps2) {
        const double gmean =
            std::pow(std::max(solver.energy(eps2, spec.p), 1e-300) / area, 1.0 / spec.p);
        return std::pow(std::max(gmean, 1e-12 * data_range / h), spec.p - 1.0) / h;
    };

    std::vector<double> grad(nfree), d(nfree);
    double res = 0.0;
    int newton_total = 0;
    bool converged = false;
    const bool debug = std::getenv("MONOFIELD_SOLVER_DEBUG") != nullptr;

    for (double eps : eps_schedule) {
        const double eps2 = eps * eps;
        double res0 = -1.0;
        int stall = 0;
        for (int iter = 0; iter < spec.max_iter; ++iter) {
            solver.cache_cells();
            const double res_scale = residual_scale(eps2);
            const double res_threshold = spec.tol * res_scale;
            solver.gradient_vec(eps2, spec.p, grad);
            res = 0.0;
            for (double gv : grad) res = std::max(res, std::abs(gv));
            res /= h * h;
            if (res0 < 0) res0 = res;
            // residual collapse by eleven digits is the round-off floor
            if (res <= res_threshold || res <= 1e-11 * res0) {
                converged = true;
                break;
            }
            converged = false;
            const double forcing = std::min(1e-2, std::sqrt(res / res_scale));
            const int sqrt_n = static_cast<int>(std::sqrt(static_cast<double>(nfree)));
            const bool linear = spec.p == 2.0;
            solver.solve_newton_system(eps2, spec.p, grad, d, linear ? 1e-12 : forcing,
                                       linear ? 2000 + 300 * sqrt_n : 500 + 30 * sqrt_n);
            ++newton_total;

            // backtracking line search on the regularized energy
            const double e0 = solver.energy(eps2, spec.p);
            double gd = 0.0;
            for (int i = 0; i < nfree; ++i) gd += grad[i] * d[i];
            if (!(gd < 0)) break;  // not a descent direction; stop this stage
            double alpha = 1.0;
            std::vector<double> trial = solver.v;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                for (int i = 0; i < nfree; ++i)
                    trial[solver.free_nodes[i]] = solver.v[solver.free_nodes[i]] + alpha * d[i];
                const double e1 = solver.energy_at(trial, eps2, spec.p);
                if (e1 <= e0 + 1e-4 * alpha * gd) {
                    solver.v = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (debug)
                std::fprintf(stderr, "  eps=%.3e iter=%d res=%.3e thr=%.3e alpha=%.3e\n", eps,
                             iter, res, res_threshold, accepted ? alpha : -1.0);
            if (!accepted) break;  // cannot decrease further at this eps
            if (alpha < 1e-6) {
                if (++stall >= 2) {
                    // line search pinned at the round-off floor for this eps
                    converged = res <= 1e-8 * res0;
                    break;
                }
            } else {
                stall = 0;
            }
        }
    }

    solver.cache_cells();
    double final_energy = solver.raw_energy();
    if (final_energy > warm_energy) {
        // never return anything worse than the warm start
        solver.v = warm_values;
        final_energy = warm_energy;
        solver.cache_cells();
        solver.gradient_vec(0.0, spec.p, grad);
        res = 0.0;
        for (double gv : grad) res = std::max(res, std::abs(gv));
        res /= h * h;
    }

    report.energy = final_energy;
    report.iterations = newton_total;
    report.grad_norm = res;
    report.converged = converged;
    return {ScalarField(g.with_mask(std::move(mask)), std::move(solver.v)), report};
}

ComparisonVerdict comparison_check(const ScalarField& solution,
                                   const DirichletProblemSpec& spec, double tol) {
    ComparisonVerdict verdict;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [n, value] : spec.boundary_data) {
        lo = std::min(lo, value);
        hi = std::max(hi, value);
    }
    verdict.data_min = lo;
    verdict.data_max = hi;
    verdict.bounds_ok = true;
    for (int n : spec.region) {
        const double v = solution[n];
        verdict.overshoot = std::max(verdict.overshoot, std::max(lo - v, v - hi));
        if (v < lo - tol || v > hi + tol) verdict.bounds_ok = false;
    }
    verdict.overshoot = std::max(verdict.overshoot, 0.0);
    verdict.monotone = is_monotone(solution).monotone;
    return verdict;
}

}  // namespace monofield
