#include "monofield/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace monofield {

using nlohmann::json;

std::string to_string(MonotonicityMethod m) {
    return m == MonotonicityMethod::ExhaustiveWindow ? "exhaustive-window" : "level-component";
}

std::string MonotonicityWitness::describe(const DomainGrid& g) const {
    std::ostringstream out;
    out << "window [" << i0 << ".." << i1 << "]x[" << j0 << ".." << j1 << "] interior "
        << (is_max ? "max " : "min ") << interior_value << " at node (" << g.node_i(node)
        << ", " << g.node_j(node) << ") vs boundary " << (is_max ? "max " : "min ")
        << boundary_extremum;
    return out.str();
}

std::string MonotonicityReport::to_json(const DomainGrid& g) const {
    json ws = json::array();
    for (const MonotonicityWitness& w : witnesses) {
        ws.push_back({{"window", {w.i0, w.j0, w.i1, w.j1}},
                      {"kind", w.is_max ? "max" : "min"},
                      {"node", {g.node_i(w.node), g.node_j(w.node)}},
                      {"interior_value", w.interior_value},
                      {"boundary_extremum", w.boundary_extremum}});
    }
    json doc;
    doc["monotone"] = monotone;
    doc["method"] = to_string(method);
    doc["tolerance"] = tolerance;
    doc["witnesses"] = std::move(ws);
    return doc.dump(2);
}

double default_monotonicity_tolerance(const ScalarField& field) {
    return 1e-9 * field.range();
}

namespace {

constexpr int kWitnessCap = 32;

struct Rect {
    int i0, j0, i1, j1;
};

// Direct evaluation of one candidate window. Returns a witness of the
// requested kind if the window is fully masked and violating.
std::optional<MonotonicityWitness> verify_window(const ScalarField& u, const Rect& r,
                                                 bool want_max, double tol) {
    const DomainGrid& g = u.grid();
    if (r.i0 < 0 || r.j0 < 0 || r.i1 >= g.nx() || r.j1 >= g.ny()) return std::nullopt;
    if (r.i1 - r.i0 < 2 || r.j1 - r.j0 < 2) return std::nullopt;
    double bext = want_max ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    double iext = bext;
    int arg = -1;
    for (int j = r.j0; j <= r.j1; ++j) {
        for (int i = r.i0; i <= r.i1; ++i) {
            if (!g.node_in(i, j)) return std::nullopt;
            const double v = u.at(i, j);
            const bool interior = i > r.i0 && i < r.i1 && j > r.j0 && j < r.j1;
            if (want_max) {
                if (interior) {
                    if (v > iext) { iext = v; arg = g.node_index(i, j); }
                } else {
                    bext = std::max(bext, v);
                }
            } else {
                if (interior) {
                    if (v < iext) { iext = v; arg = g.node_index(i, j); }
                } else {
                    bext = std::min(bext, v);
                }
            }
        }
    }
    const bool violates = want_max ? (iext > bext + tol) : (iext < bext - tol);
    if (!violates) return std::nullopt;
    MonotonicityWitness w;
    w.i0 = r.i0; w.j0 = r.j0; w.i1 = r.i1; w.j1 = r.j1;
    w.is_max = want_max;
    w.node = arg;
    w.interior_value = iext;
    w.boundary_extremum = bext;
    return w;
}

// Sliding scan over all windows inside a sub-rectangle. `strict` switches the
// violation test from "interior beats boundary by more than tol" to
// "interior attains the window extremum within tol".
std::vector<MonotonicityWitness> window_scan(const ScalarField& u, double tol, bool strict,
                                             Rect bounds, int cap) {
    const DomainGrid& g = u.grid();
    const int nx = g.nx();
    std::vector<MonotonicityWitness> found;
    std::set<std::pair<int, bool>> seen_nodes;

    std::vector<double> colFullMax(nx), colFullMin(nx), colInnerMax(nx), colInnerMin(nx);
    std::vector<double> tbMax(nx), tbMin(nx);
    std::vector<int> colInnerArgMax(nx), colInnerArgMin(nx);
    std::vector<std::uint8_t> colOK(nx);

    auto record = [&](MonotonicityWitness w) {
        const auto key = std::make_pair(w.node, w.is_max);
        if (seen_nodes.count(key)) return;
        seen_nodes.insert(key);
        found.push_back(w);
    };

    for (int j0 = bounds.j0; j0 <= bounds.j1 - 2; ++j0) {
        for (int i = bounds.i0; i <= bounds.i1; ++i) {
            colOK[i] = g.node_in(i, j0) ? 1 : 0;
            colFullMax[i] = colOK[i] ? u.at(i, j0) : 0.0;
            colFullMin[i] = colFullMax[i];
            colInnerMax[i] = -std::numeric_limits<double>::infinity();
            colInnerMin[i] = std::numeric_limits<double>::infinity();
            colInnerArgMax[i] = colInnerArgMin[i] = -1;
        }
        for (int j1 = j0 + 2; j1 <= bounds.j1; ++j1) {
            for (int i = bounds.i0; i <= bounds.i1; ++i) {
                if (!colOK[i]) continue;
                // row j1 joins the column; row j1-1 moves into the interior
                if (!g.node_in(i, j1) || !g.node_in(i, j1 - 1)) {
                    colOK[i] = 0;
                    continue;
                }
                const double vnew = u.at(i, j1);
                const double vin = u.at(i, j1 - 1);
                colFullMax[i] = std::max(colFullMax[i], vnew);
                colFullMin[i] = std::min(colFullMin[i], vnew);
                if (vin > colInnerMax[i]) {
                    colInnerMax[i] = vin;
                    colInnerArgMax[i] = g.node_index(i, j1 - 1);
                }
                if (vin < colInnerMin[i]) {
                    colInnerMin[i] = vin;
                    colInnerArgMin[i] = g.node_index(i, j1 - 1);
                }
                tbMax[i] = std::max(u.at(i, j0), vnew);
                tbMin[i] = std::min(u.at(i, j0), vnew);
            }
            for (int i0 = bounds.i0; i0 <= bounds.i1 - 2; ++i0) {
                if (!colOK[i0]) continue;
                double runInnerMax = -std::numeric_limits<double>::infinity();
                double runInnerMin = std::numeric_limits<double>::infinity();
                int runArgMax = -1, runArgMin = -1;
                double runTBMax = runInnerMax, runTBMin = runInnerMin;
                for (int i1 = i0 + 2; i1 <= bounds.i1; ++i1) {
                    const int ic = i1 - 1;  // column entering the interior
                    if (!colOK[ic]) break;
                    if (colInnerMax[ic] > runInnerMax) {
                        runInnerMax = colInnerMax[ic];
                        runArgMax = colInnerArgMax[ic];
                    }
                    if (colInnerMin[ic] < runInnerMin) {
                        runInnerMin = colInnerMin[ic];
                        runArgMin = colInnerArgMin[ic];
                    }
                    runTBMax = std::max(runTBMax, tbMax[ic]);
                    runTBMin = std::min(runTBMin, tbMin[ic]);
                    if (!colOK[i1]) break;
                    const double bMax = std::max({colFullMax[i0], colFullMax[i1], runTBMax});
                    const double bMin = std::min({colFullMin[i0], colFullMin[i1], runTBMin});
                    const bool vioMax = strict ? (runInnerMax >= bMax - tol)
                                               : (runInnerMax > bMax + tol);
                    const bool vioMin = strict ? (runInnerMin <= bMin + tol)
                                               : (runInnerMin < bMin - tol);
                    if (vioMax) {
                        MonotonicityWitness w;
                        w.i0 = i0; w.j0 = j0; w.i1 = i1; w.j1 = j1;
                        w.is_max = true;
                        w.node = runArgMax;
                        w.interior_value = runInnerMax;
                        w.boundary_extremum = bMax;
                        record(w);
                    }
                    if (vioMin) {
                        MonotonicityWitness w;
                        w.i0 = i0; w.j0 = j0; w.i1 = i1; w.j1 = j1;
                        w.is_max = false;
                        w.node = runArgMin;
                        w.interior_value = runInnerMin;
                        w.boundary_extremum = bMin;
                        record(w);
                    }
                    if (static_cast<int>(found.size()) >= cap) return found;
                }
            }
        }
    }
    return found;
}

Rect full_rect(const DomainGrid& g) { return Rect{0, 0, g.nx() - 1, g.ny() - 1}; }

// --- level-component sweep ------------------------------------------------

struct SweepUF {
    std::vector<int> parent, head, tail, next;
    std::vector<double> peak;
    std::vector<int> peak_node;
    std::vector<int> imin, imax, jmin, jmax;
    std::vector<std::uint8_t> active, touches, witnessed;
    std::set<int> roots;

    explicit SweepUF(int n)
        : parent(n, -1), head(n, -1), tail(n, -1), next(n, -1), peak(n, 0.0), peak_node(n, -1),
          imin(n, 0), imax(n, 0), jmin(n, 0), jmax(n, 0), active(n, 0), touches(n, 0),
          witnessed(n, 0) {}

    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    void activate(const DomainGrid& g, int n, double value) {
        parent[n] = n;
        head[n] = tail[n] = n;
        next[n] = -1;
        peak[n] = value;
        peak_node[n] = n;
        imin[n] = imax[n] = g.node_i(n);
        jmin[n] = jmax[n] = g.node_j(n);
        active[n] = 1;
        touches[n] = g.is_boundary_node(n) ? 1 : 0;
        witnessed[n] = 0;
        roots.insert(n);
    }

    void merge(int a, int b, bool better_is_max) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // keep the smaller node index as root so iteration order is stable
        if (b < a) std::swap(a, b);
        parent[b] = a;
        next[tail[a]] = head[b];
        tail[a] = tail[b];
        const bool take = better_is_max ? (peak[b] > peak[a]) : (peak[b] < peak[a]);
        if (take) {
            peak[a] = peak[b];
            peak_node[a] = peak_node[b];
        }
        imin[a] = std::min(imin[a], imin[b]);
        imax[a] = std::max(imax[a], imax[b]);
        jmin[a] = std::min(jmin[a], jmin[b]);
        jmax[a] = std::max(jmax[a], jmax[b]);
        touches[a] |= touches[b];
        witnessed[a] |= witnessed[b];
        roots.erase(b);
    }
};

struct ComponentCheck {
    bool accepted_by_hole = false;
    Rect filled_bbox{0, 0, 0, 0};
};

// Floods the lattice complement of the component from the frame. Fills in
// enclosed pockets; a pocket containing an unmasked node means the component
// encircles a hole of the domain.
ComponentCheck inspect_component(const DomainGrid& g, SweepUF& uf, int root,
                                 std::vector<int>& stamp, int& epoch) {
    ++epoch;
    for (int n = uf.head[root]; n != -1; n = uf.next[n]) stamp[n] = epoch;

    std::vector<std::uint8_t> reached(g.node_count(), 0);
    std::deque<int> queue;
    auto try_push = [&](int i, int j) {
        if (i < 0 || i >= g.nx() || j < 0 || j >= g.ny()) return;
        const int n = g.node_index(i, j);
        if (reached[n] || stamp[n] == epoch) return;
        reached[n] = 1;
        queue.push_back(n);
    };
    for (int i = 0; i < g.nx(); ++i) {
        try_push(i, 0);
        try_push(i, g.ny() - 1);
    }
    for (int j = 0; j < g.ny(); ++j) {
        try_push(0, j);
        try_push(g.nx() - 1, j);
    }
    while (!queue.empty()) {
        const int n = queue.front();
        queue.pop_front();
        const int i = g.node_i(n), j = g.node_j(n);
        try_push(i - 1, j);
        try_push(i + 1, j);
        try_push(i, j - 1);
        try_push(i, j + 1);
    }

    ComponentCheck out;
    out.filled_bbox = Rect{uf.imin[root], uf.jmin[root], uf.imax[root], uf.jmax[root]};
    for (int n = 0; n < g.node_count(); ++n) {
        if (reached[n] || stamp[n] == epoch) continue;
        // enclosed pocket node
        if (!g.node_in(n)) {
            out.accepted_by_hole = true;
            return out;
        }
        out.filled_bbox.i0 = std::min(out.filled_bbox.i0, g.node_i(n));
        out.filled_bbox.i1 = std::max(out.filled_bbox.i1, g.node_i(n));
        out.filled_bbox.j0 = std::min(out.filled_bbox.j0, g.node_j(n));
        out.filled_bbox.j1 = std::max(out.filled_bbox.j1, g.node_j(n));
    }
    return out;
}

}  // namespace

MonotonicityReport is_monotone(const ScalarField& field, MonotonicityMethod method,
                               double tolerance) {
    const double tol = tolerance >= 0 ? tolerance : default_monotonicity_tolerance(field);
    MonotonicityReport report;
    report.method = method;
    report.tolerance = tol;

    if (method == MonotonicityMethod::ExhaustiveWindow) {
        report.witnesses = window_scan(field, tol, false, full_rect(field.grid()), kWitnessCap);
        report.monotone = report.witnesses.empty();
        return report;
    }

    const DomainGrid& g = field.grid();
    const auto& nodes = g.nodes();
    std::vector<int> order(nodes.begin(), nodes.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (field[a] != field[b]) return field[a] < field[b];
        return a < b;
    });

    std::vector<double> distinct;
    for (int n : order)
        if (distinct.empty() || field[n] != distinct.back()) distinct.push_back(field[n]);

    std::vector<int> stamp(g.node_count(), 0);
    int epoch = 0;

    auto run_pass = [&](bool descending) {
        SweepUF uf(g.node_count());
        const int m = static_cast<int>(distinct.size());
        int pos = descending ? static_cast<int>(order.size()) - 1 : 0;
        for (int step = 0; step < m; ++step) {
            const int level_idx = descending ? m - 1 - step : step;
            const double v = distinct[level_idx];
            while (pos >= 0 && pos < static_cast<int>(order.size()) &&
                   field[order[pos]] == v) {
                const int n = order[pos];
                uf.activate(g, n, v);
                const int i = g.node_i(n), j = g.node_j(n);
                const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
                for (const auto& ij : nb) {
                    if (!g.node_in(ij[0], ij[1])) continue;
                    const int mnode = g.node_index(ij[0], ij[1]);
                    if (uf.active[mnode]) uf.merge(n, mnode, descending);
                }
                pos += descending ? -1 : +1;
            }
            // outside values are bounded by the neighboring distinct level
            const bool has_outside = descending ? (level_idx > 0) : (level_idx + 1 < m);
            if (!has_outside) continue;
            const double outside = descending ? distinct[level_idx - 1] : distinct[level_idx + 1];

            for (auto it = uf.roots.begin(); it != uf.roots.end(); ++it) {
                const int root = *it;
                if (uf.touches[root] || uf.witnessed[root]) continue;
                const double margin =
                    descending ? uf.peak[root] - outside : outside - uf.peak[root];
                if (!(margin > tol)) continue;
                ComponentCheck check = inspect_component(g, uf, root, stamp, epoch);
                if (check.accepted_by_hole) continue;

                const Rect expanded{check.filled_bbox.i0 - 1, check.filled_bbox.j0 - 1,
                                    check.filled_bbox.i1 + 1, check.filled_bbox.j1 + 1};
                std::optional<MonotonicityWitness> w =
                    verify_window(field, expanded, descending, tol);
                if (!w) {
                    const int pn = uf.peak_node[root];
                    w = verify_window(field,
                                      Rect{g.node_i(pn) - 1, g.node_j(pn) - 1, g.node_i(pn) + 1,
                                           g.node_j(pn) + 1},
                                      descending, tol);
                }
                if (!w) {
                    const Rect local{std::max(0, expanded.i0 - 1), std::max(0, expanded.j0 - 1),
                                     std::min(g.nx() - 1, expanded.i1 + 1),
                                     std::min(g.ny() - 1, expanded.j1 + 1)};
                    auto ws = window_scan(field, tol, false, local, 1);
                    if (!ws.empty()) w = ws.front();
                }
                if (w) {
                    report.witnesses.push_back(*w);
                    uf.witnessed[root] = 1;
                    if (static_cast<int>(report.witnesses.size()) >= kWitnessCap) return false;
                } else {
                    // No rectangle confirms this component; defer to the full
                    // window scan as the authority for the whole field.
                    return true;
                }
            }
        }
        return false;
    };

    const bool need_full_scan = run_pass(true) ||
                                (static_cast<int>(report.witnesses.size()) < kWitnessCap &&
                                 run_pass(false));
    if (need_full_scan) {
        report.witnesses = window_scan(field, tol, false, full_rect(g), kWitnessCap);
    }
    report.monotone = report.witnesses.empty();
    return report;
}

MonotonicityReport is_strictly_monotone(const ScalarField& field, double tolerance) {
    const double tol = tolerance >= 0 ? tolerance : default_monotonicity_tolerance(field);
    MonotonicityReport report;
    report.method = MonotonicityMethod::ExhaustiveWindow;
    report.tolerance = tol;
    report.witnesses = window_scan(field, tol, true, full_rect(field.grid()), kWitnessCap);
    report.monotone = report.witnesses.empty();
    return report;
}

std::vector<double> local_extremal_values(const ScalarField& field) {
    const DomainGrid& g = field.grid();
    std::vector<double> values;
    for (int n : g.nodes()) {
        const int i = g.node_i(n), j = g.node_j(n);
        bool full = true;
        bool le = true, ge = true;  // neighbors <= v / >= v
        const double v = field[n];
        for (int dj = -1; dj <= 1 && full; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0) continue;
                if (!g.node_in(i + di, j + dj)) {
                    full = false;
                    break;
                }
                const double w = field.at(i + di, j + dj);
                le = le && w <= v;
                ge = ge && w >= v;
            }
        }
        if (full && (le || ge)) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

std::vector<int> interface_nodes(const DomainGrid& grid, const std::vector<int>& region) {
    std::vector<std::uint8_t> in_region(grid.node_count(), 0);
    for (int n : region) in_region[n] = 1;
    std::vector<int> interface;
    std::vector<std::uint8_t> taken(grid.node_count(), 0);
    for (int n : region) {
        const int i = grid.node_i(n), j = grid.node_j(n);
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0) continue;
                if (!grid.node_in(i + di, j + dj)) continue;
                const int m = grid.node_index(i + di, j + dj);
                if (in_region[m] || taken[m]) continue;
                taken[m] = 1;
                interface.push_back(m);
            }
        }
    }
    std::sort(interface.begin(), interface.end());
    return interface;
}

ScalarField glue_on_bands(const ScalarField& u, const BandPartition& partition,
                          const std::map<BandComponentKey, ScalarField>& replacements,
                          double tolerance) {
    const DomainGrid& g = u.grid();
    const double inf = std::numeric_limits<double>::infinity();
    ScalarField out = u;

    const bool was_monotone = is_monotone(u).monotone;
    bool replacements_monotone = true;

    std::map<int, std::vector<std::vector<int>>> components_by_band;
    for (const auto& [key, repl] : replacements) {
        if (key.band < 0 || key.band >= static_cast<int>(partition.bands.size()))
            throw Error("glue_on_bands: band index out of range");
        auto it = components_by_band.find(key.band);
        if (it == components_by_band.end())
            it = components_by_band
                     .emplace(key.band, band_components(g, partition.bands[key.band]))
                     .first;
        const auto& comps = it->second;
        if (key.component < 0 || key.component >= static_cast<int>(comps.size()))
            throw Error("glue_on_bands: component index out of range");
        const std::vector<int>& region = comps[key.component];

        if (!repl.grid().same_geometry(g))
            throw GridMismatchError("glue_on_bands: replacement grid geometry differs");

        const double lo = key.band == 0 ? -inf : partition.levels[key.band - 1];
        const double hi = key.band == static_cast<int>(partition.levels.size())
                              ? inf
                              : partition.levels[key.band];
        for (int n : region) {
            if (!repl.grid().node_in(n)) continue;  // node keeps the field's value
            const double v = repl[n];
            if (v < lo - tolerance || v > hi + tolerance) {
                std::ostringstream msg;
                msg << "glue_on_bands: replacement value " << v << " at node ("
                    << g.node_i(n) << ", " << g.node_j(n) << ") leaves [" << lo << ", " << hi
                    << "] by more than " << tolerance;
                throw RangeViolationError(msg.str());
            }
        }
        for (int n : interface_nodes(g, region)) {
            if (!repl.grid().node_in(n)) continue;  // replacement may omit interface nodes
            if (std::abs(repl[n] - u[n]) > tolerance) {
                std::ostringstream msg;
                msg << "glue_on_bands: replacement differs from field by "
                    << std::abs(repl[n] - u[n]) << " at interface node (" << g.node_i(n)
                    << ", " << g.node_j(n) << ")";
                throw InterfaceMismatchError(msg.str());
            }
        }
        if (replacements_monotone && !is_monotone(repl).monotone) replacements_monotone = false;
        for (int n : region)
            if (repl.grid().node_in(n)) out[n] = repl[n];
    }

    if (was_monotone) {
        const MonotonicityReport post = is_monotone(out);
        if (!post.monotone) {
            std::ostringstream msg;
            msg << "glue_on_bands: glued field is not monotone ("
                << post.witnesses.size() << " witness(es); replacements "
                << (replacements_monotone ? "were" : "were NOT") << " monotone), first: "
                << post.witnesses.front().describe(g);
            throw MonotonicityViolationError(msg.str());
        }
    }
    return out;
}

GlueVerdict glue_strict_over(const ScalarField& core, const ScalarField& patch,
                             double overlap_tolerance, MonotonicityMethod method) {
    const DomainGrid& gc = core.grid();
    const DomainGrid& gp = patch.grid();
    if (!gc.same_geometry(gp))
        throw GridMismatchError("glue_strict_over: core and patch grids differ in geometry");

    std::vector<std::uint8_t> ambient(gc.node_count(), 0);
    for (int n = 0; n < gc.node_count(); ++n)
        ambient[n] = (gc.node_in(n) || gp.node_in(n)) ? 1 : 0;

    // V = ambient minus core; its discrete closure must sit inside the patch.
    for (int n = 0; n < gc.node_count(); ++n) {
        if (!ambient[n] || gc.node_in(n)) continue;
        const int i = n % gc.nx(), j = n / gc.nx();
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int ii = i + di, jj = j + dj;
                if (ii < 0 || ii >= gc.nx() || jj < 0 || jj >= gc.ny()) continue;
                const int m = jj * gc.nx() + ii;
                if (!ambient[m]) continue;
                if (!gp.node_in(m)) {
                    std::ostringstream msg;
                    msg << "glue_strict_over: closure of the patched set leaves the patch at "
                           "node ("
                        << ii << ", " << jj << ")";
                    throw Error(msg.str());
                }
            }
        }
    }

    std::vector<double> combined(gc.node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int n = 0; n < gc.node_count(); ++n) {
        if (!ambient[n]) continue;
        if (gc.node_in(n) && gp.node_in(n)) {
            if (std::abs(core[n] - patch[n]) > overlap_tolerance) {
                std::ostringstream msg;
                msg << "glue_strict_over: core and patch disagree by "
                    << std::abs(core[n] - patch[n]) << " at node (" << n % gc.nx() << ", "
                    << n / gc.nx() << ")";
                throw InterfaceMismatchError(msg.str());
            }
            combined[n] = core[n];
        } else if (gc.node_in(n)) {
            combined[n] = core[n];
        } else {
            combined[n] = patch[n];
        }
    }

    auto grid = gc.with_mask(std::move(ambient));
    ScalarField whole(std::move(grid), std::move(combined));
    GlueVerdict verdict;
    verdict.report = is_monotone(whole, method);
    verdict.monotone = verdict.report.monotone;
    return verdict;
}

}  // namespace monofield
