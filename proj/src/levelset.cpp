#include "monofield/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "monofield/monotonicity.hpp"

namespace monofield {

using nlohmann::json;

std::string to_string(CurveClass c) {
    switch (c) {
        case CurveClass::Point: return "Point";
        case CurveClass::JordanCurve: return "JordanCurve";
        case CurveClass::Arc: return "Arc";
        case CurveClass::Degenerate: return "Degenerate";
    }
    return "?";
}

double LevelCurve::diameter() const {
    double d2 = 0.0;
    for (size_t a = 0; a < xs.size(); ++a)
        for (size_t b = a + 1; b < xs.size(); ++b) {
            const double dx = xs[a] - xs[b], dy = ys[a] - ys[b];
            d2 = std::max(d2, dx * dx + dy * dy);
        }
    return std::sqrt(d2);
}

bool LevelSetAnalysis::all_regular() const {
    if (!junctions.empty()) return false;
    for (const LevelCurve& c : components)
        if (c.classification == CurveClass::Degenerate) return false;
    return true;
}

std::string LevelSetAnalysis::to_json() const {
    json comps = json::array();
    for (const LevelCurve& c : components) {
        json pts = json::array();
        for (int k = 0; k < c.size(); ++k) pts.push_back({c.xs[k], c.ys[k]});
        comps.push_back({{"class", to_string(c.classification)},
                         {"closed", c.closed},
                         {"length", c.length},
                         {"touches_boundary", c.touches_boundary},
                         {"points", std::move(pts)}});
    }
    json juncs = json::array();
    for (const JunctionCell& jc : junctions)
        juncs.push_back({{"cell", jc.cell}, {"incident", jc.incident_segments}});
    json doc;
    doc["t"] = t;
    doc["components"] = std::move(comps);
    doc["junctions"] = std::move(juncs);
    doc["total_length"] = total_length;
    return doc.dump(2);
}

namespace {

struct Extractor {
    const ScalarField& field;
    const DomainGrid& g;
    double t;
    double snap;
    std::vector<double> d;  // snapped value minus t, per node
    std::vector<std::uint8_t> snapped_;

    // edge id: 2*node for the horizontal edge to (i+1,j), 2*node+1 for the
    // vertical edge to (i,j+1)
    std::vector<int> vertex_of_edge;
    std::vector<double> vx, vy;        // vertex positions
    std::vector<int> vna, vnb;         // the edge's endpoint nodes per vertex
    std::vector<std::vector<int>> incident;  // segment ids per vertex
    struct Segment {
        int a, b, cell;
    };
    std::vector<Segment> segments;
    std::map<int, int> junction_cells;  // cell -> incident count

    Extractor(const ScalarField& f, double t_) : field(f), g(f.grid()), t(t_) {
        double range = 0.0;
        {
            const double lo = field.min(), hi = field.max();
            range = hi - lo;
        }
        snap = 1e-12 * (range > 0 ? range : std::max(1.0, std::abs(t)));
        d.assign(g.node_count(), std::numeric_limits<double>::quiet_NaN());
        snapped_.assign(g.node_count(), 0);
        for (int n : g.nodes()) {
            const double v = field[n];
            if (std::abs(v - t) <= snap) {
                d[n] = snap;
                snapped_[n] = 1;
            } else {
                d[n] = v - t;
            }
        }
        vertex_of_edge.assign(2 * g.node_count(), -1);
    }

    bool snapped(int n) const { return snapped_[n] != 0; }

    int vertex_on_edge(int node, bool vertical) {
        const int eid = 2 * node + (vertical ? 1 : 0);
        int v = vertex_of_edge[eid];
        if (v >= 0) return v;
        const int other = vertical ? node + g.nx() : node + 1;
        const double da = d[node], db = d[other];
        const double tau = da / (da - db);
        v = static_cast<int>(vx.size());
        vx.push_back(g.node_x(node) + (vertical ? 0.0 : tau * g.h()));
        vy.push_back(g.node_y(node) + (vertical ? tau * g.h() : 0.0));
        vna.push_back(node);
        vnb.push_back(other);
        incident.emplace_back();
        vertex_of_edge[eid] = v;
        return v;
    }

    void add_segment(int va, int vb, int cell) {
        const int s = static_cast<int>(segments.size());
        segments.push_back({va, vb, cell});
        incident[va].push_back(s);
        incident[vb].push_back(s);
    }

    void mark_junction(int cell, int count) {
        auto [it, fresh] = junction_cells.try_emplace(cell, count);
        if (!fresh) it->second = std::max(it->second, count);
    }

    void run() {
        for (int c : g.cells()) {
            const int ci = g.cell_i(c), cj = g.cell_j(c);
            const int n00 = g.node_index(ci, cj);
            const int n10 = n00 + 1;
            const int n01 = n00 + g.nx();
            const int n11 = n01 + 1;
            if (snapped(n00) && snapped(n10) && snapped(n01) && snapped(n11)) {
                mark_junction(c, 4);
                continue;
            }
            const bool b00 = d[n00] > 0, b10 = d[n10] > 0, b01 = d[n01] > 0, b11 = d[n11] > 0;
            const bool cross_bottom = b00 != b10;
            const bool cross_top = b01 != b11;
            const bool cross_left = b00 != b01;
            const bool cross_right = b10 != b11;
            const int crossings = cross_bottom + cross_top + cross_left + cross_right;
            if (crossings == 0) continue;
            const int vbot = cross_bottom ? vertex_on_edge(n00, false) : -1;
            const int vtop = cross_top ? vertex_on_edge(n01, false) : -1;
            const int vleft = cross_left ? vertex_on_edge(n00, true) : -1;
            const int vright = cross_right ? vertex_on_edge(n10, true) : -1;
            if (crossings == 2) {
                int a = -1, b = -1;
                for (int v : {vbot, vright, vtop, vleft}) {
                    if (v < 0) continue;
                    (a < 0 ? a : b) = v;
                }
                add_segment(a, b, c);
            } else {
                // Ambiguous saddle cell: resolve by the bilinear center value.
                const double center = 0.25 * (d[n00] + d[n10] + d[n01] + d[n11]);
                const bool center_pos = center > 0;
                if (b00 == center_pos) {
                    // corners 00 and 11 connect through the middle
                    add_segment(vbot, vright, c);
                    add_segment(vleft, vtop, c);
                } else {
                    add_segment(vbot, vleft, c);
                    add_segment(vtop, vright, c);
                }
            }
        }

        // Level lines running through lattice nodes: a snapped node with >= 3
        // snapped 4-neighbors marks a junction crossing at a cell corner.
        for (int n : g.nodes()) {
            if (!snapped(n)) continue;
            const int i = g.node_i(n), j = g.node_j(n);
            int count = 0;
            const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& ij : nb)
                if (ij[0] >= 0 && ij[0] < g.nx() && ij[1] >= 0 && ij[1] < g.ny() &&
                    g.node_in(ij[0], ij[1]) && snapped(g.node_index(ij[0], ij[1])))
                    ++count;
            if (count < 3) continue;
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di)
                    if (g.cell_in(i + di, j + dj)) mark_junction(g.cell_index(i + di, j + dj), count);
        }

        // Safety net: more than two segments meeting at one crossing.
        for (size_t v = 0; v < incident.size(); ++v) {
            if (incident[v].size() < 3) continue;
            const int count = static_cast<int>(incident[v].size());
            for (int s : incident[v]) mark_junction(segments[s].cell, count);
        }
    }

    bool edge_in_boundary_cell(int vertex) const {
        const int na = vna[vertex];
        const int i = g.node_i(na), j = g.node_j(na);
        const bool vertical = (vnb[vertex] == na + g.nx());
        int cells[2];
        if (vertical) {
            cells[0] = (i - 1 >= 0 && j < g.ny() - 1) ? g.cell_index(i - 1, j) : -1;
            cells[1] = (i < g.nx() - 1 && j < g.ny() - 1) ? g.cell_index(i, j) : -1;
        } else {
            cells[0] = (j - 1 >= 0 && i < g.nx() - 1) ? g.cell_index(i, j - 1) : -1;
            cells[1] = (i < g.nx() - 1 && j < g.ny() - 1) ? g.cell_index(i, j) : -1;
        }
        for (int c : cells)
            if (c >= 0 && g.cell_in(c) && g.is_boundary_cell(c)) return true;
        return false;
    }
};

}  // namespace

LevelSetAnalysis extract_level_set(const ScalarField& field, double t) {
    if (!std::isfinite(t)) throw Error("extract_level_set: t must be finite");
    Extractor ex(field, t);
    ex.run();

    LevelSetAnalysis analysis;
    analysis.t = t;
    analysis.snap = ex.snap;
    for (const auto& [cell, count] : ex.junction_cells)
        analysis.junctions.push_back({cell, count});

    const DomainGrid& g = field.grid();
    std::vector<std::uint8_t> node_near_junction(g.node_count(), 0);
    for (const auto& [cell, count] : ex.junction_cells) {
        const int ci = g.cell_i(cell), cj = g.cell_j(cell);
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di)
                node_near_junction[g.node_index(ci + di, cj + dj)] = 1;
    }

    const int n_vertices = static_cast<int>(ex.vx.size());
    auto degree = [&](int v) { return static_cast<int>(ex.incident[v].size()); };
    std::vector<std::uint8_t> used(ex.segments.size(), 0);

    auto walk = [&](int start_vertex, int start_segment) {
        std::vector<int> chain_vertices{start_vertex};
        int v = start_vertex;
        int s = start_segment;
        while (true) {
            used[s] = 1;
            const auto& seg = ex.segments[s];
            v = (seg.a == v) ? seg.b : seg.a;
            chain_vertices.push_back(v);
            if (v == start_vertex) break;       // closed loop
            if (degree(v) != 2) break;          // open end or junction stop
            const auto& inc = ex.incident[v];
            const int next = (inc[0] == s) ? inc[1] : inc[0];
            if (used[next]) break;
            s = next;
        }
        return chain_vertices;
    };

    std::vector<std::vector<int>> chains;
    for (int v = 0; v < n_vertices; ++v) {
        if (degree(v) == 2) continue;
        for (int s : ex.incident[v])
            if (!used[s]) chains.push_back(walk(v, s));
    }
    for (size_t s = 0; s < ex.segments.size(); ++s) {
        if (used[s]) continue;
        chains.push_back(walk(ex.segments[s].a, static_cast<int>(s)));
    }

    const double two_h = 2.0 * g.h();
    for (const std::vector<int>& chain : chains) {
        LevelCurve curve;
        curve.closed = chain.size() > 2 && chain.front() == chain.back();
        bool tainted = false;
        for (int v : chain) {
            curve.xs.push_back(ex.vx[v]);
            curve.ys.push_back(ex.vy[v]);
            if (node_near_junction[ex.vna[v]] || node_near_junction[ex.vnb[v]]) tainted = true;
            if (degree(v) > 2) tainted = true;
        }
        for (size_t k = 1; k < chain.size(); ++k)
            curve.length += std::hypot(curve.xs[k] - curve.xs[k - 1], curve.ys[k] - curve.ys[k - 1]);

        bool contact;
        if (curve.closed) {
            contact = false;
            for (int v : chain) contact = contact || ex.edge_in_boundary_cell(v);
            curve.touches_boundary = contact;
        } else {
            const bool front_bd = ex.edge_in_boundary_cell(chain.front());
            const bool back_bd = ex.edge_in_boundary_cell(chain.back());
            contact = front_bd || back_bd;
            curve.touches_boundary = contact;
            if (tainted || !(front_bd && back_bd)) {
                curve.classification = CurveClass::Degenerate;
                analysis.total_length += curve.length;
                analysis.components.push_back(std::move(curve));
                continue;
            }
        }
        if (tainted)
            curve.classification = CurveClass::Degenerate;
        else if (curve.length < two_h && !contact)
            curve.classification = CurveClass::Point;
        else if (curve.closed)
            curve.classification = CurveClass::JordanCurve;
        else
            curve.classification = CurveClass::Arc;
        analysis.total_length += curve.length;
        analysis.components.push_back(std::move(curve));
    }
    return analysis;
}

double hausdorff1_length(const LevelSetAnalysis& analysis) { return analysis.total_length; }

CoareaReport coarea_check(const ScalarField& field, int n_levels) {
    if (n_levels < 8) throw Error("coarea_check: need n_levels >= 8");
    CoareaReport report;
    report.n_levels = n_levels;

    const double lo = field.min(), hi = field.max();
    const double range = hi - lo;

    const VectorField grad = gradient(field);
    const double h2 = field.grid().h() * field.grid().h();
    double rhs = 0.0;
    for (int c : field.grid().cells()) rhs += grad.norm(c) * h2;
    report.rhs = rhs;

    double lhs = 0.0;
    if (range > 0.0) {
        const double dt = range / n_levels;
        for (int k = 0; k < n_levels; ++k) {
            const double t = lo + (k + 0.5) * dt;
            lhs += extract_level_set(field, t).total_length * dt;
        }
    }
    report.lhs = lhs;
    report.rel_error = std::abs(lhs - rhs) / std::max(rhs, 1e-12);
    if (lhs == 0.0 && rhs == 0.0) report.rel_error = 0.0;
    return report;
}

std::string CoareaReport::to_json() const {
    json doc;
    doc["lhs"] = lhs;
    doc["rhs"] = rhs;
    doc["rel_error"] = rel_error;
    doc["n_levels"] = n_levels;
    return doc.dump(2);
}

namespace {

// radical-inverse base 2
double van_der_corput(int k) {
    double r = 0.0, f = 0.5;
    while (k > 0) {
        r += f * (k & 1);
        k >>= 1;
        f *= 0.5;
    }
    return r;
}

}  // namespace

std::vector<double> select_regular_levels(const ScalarField& field,
                                          const std::vector<double>& targets, double jitter,
                                          int budget, const LevelPredicate& extra_accept) {
    if (!(jitter > 0)) throw Error("select_regular_levels: jitter must be positive");
    for (size_t k = 1; k < targets.size(); ++k) {
        if (!(targets[k] > targets[k - 1]))
            throw Error("select_regular_levels: targets must be strictly increasing");
        if (!(jitter < 0.5 * (targets[k] - targets[k - 1])))
            throw Error("select_regular_levels: jitter must be below half the minimal target gap");
    }

    const std::vector<double> extremal = local_extremal_values(field);
    const double range = field.range();
    const double snap = 1e-12 * (range > 0 ? range : 1.0);
    auto near_extremal = [&](double t) {
        for (double e : extremal)
            if (std::abs(t - e) <= snap) return true;
        return false;
    };

    std::vector<double> schedule;
    schedule.reserve(targets.size());
    for (double target : targets) {
        bool found = false;
        for (int k = 0; k < budget; ++k) {
            double t = target;
            if (k > 0) {
                const double mag = jitter * van_der_corput((k + 1) / 2);
                t = target + ((k % 2 == 1) ? mag : -mag);
            }
            if (!schedule.empty() && t <= schedule.back()) continue;
            if (near_extremal(t)) continue;
            const LevelSetAnalysis analysis = extract_level_set(field, t);
            if (!analysis.all_regular()) continue;
            if (extra_accept && !extra_accept(t, analysis)) continue;
            schedule.push_back(t);
            found = true;
            break;
        }
        if (!found) {
            std::ostringstream msg;
            msg << "select_regular_levels: no regular level within " << jitter << " of "
                << target << " after " << budget << " candidates";
            throw SearchExhaustedError(msg.str());
        }
    }
    return schedule;
}

void write_contours_csv(const LevelSetAnalysis& analysis, std::ostream& out) {
    out << "component,vertex,x,y\n";
    out.precision(17);
    for (size_t c = 0; c < analysis.components.size(); ++c) {
        const LevelCurve& curve = analysis.components[c];
        for (int k = 0; k < curve.size(); ++k)
            out << c << "," << k << "," << curve.xs[k] << "," << curve.ys[k] << "\n";
    }
}

}  // namespace monofield
