#include "monofield/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace monofield {

using nlohmann::json;

double alpha_profile(double t) {
    if (t <= 0.5) return 0.0;
    if (t >= 1.0) return 1.0;
    const double s = 2.0 * t - 1.0;
    return s * s * (3.0 - 2.0 * s);
}

double alpha_profile_slope(double t) {
    if (t <= 0.5 || t >= 1.0) return 0.0;
    const double s = 2.0 * t - 1.0;
    return 12.0 * s * (1.0 - s);
}

std::string to_string(SmoothingCase c) {
    switch (c) {
        case SmoothingCase::TwoSided: return "TwoSided";
        case SmoothingCase::OneSidedExp: return "OneSidedExp";
        case SmoothingCase::SameSignExp: return "SameSignExp";
        case SmoothingCase::AllFlat: return "AllFlat";
    }
    return "?";
}

std::string TubularChart::to_json() const {
    json doc;
    doc["periodic"] = periodic;
    doc["reach"] = reach;
    doc["length"] = total_length;
    doc["nodes"] = entries.size();
    doc["flipped"] = flipped;
    return doc.dump(2);
}

std::string SmoothingProfile::to_json() const {
    json doc;
    doc["beta"] = beta;
    doc["gamma"] = gamma;
    doc["delta"] = delta;
    doc["case"] = to_string(sides.kind);
    return doc.dump(2);
}

namespace {

struct SegmentGeometry {
    double ax, ay, bx, by;
    double len;
    double tx, ty;  // unit tangent
};

double point_segment_distance(const SegmentGeometry& s, double px, double py, double& tau) {
    const double dx = s.bx - s.ax, dy = s.by - s.ay;
    const double l2 = dx * dx + dy * dy;
    tau = l2 > 0 ? ((px - s.ax) * dx + (py - s.ay) * dy) / l2 : 0.0;
    tau = std::clamp(tau, 0.0, 1.0);
    const double qx = s.ax + tau * dx, qy = s.ay + tau * dy;
    return std::hypot(px - qx, py - qy);
}

// uniform spatial hash; queries visit the 3x3 neighborhood, so anything
// within one cell size of the query point is guaranteed to be found
struct BucketGrid {
    double cell = 1.0;
    std::map<std::pair<int, int>, std::vector<int>> buckets;

    std::pair<int, int> key(double x, double y) const {
        return {static_cast<int>(std::floor(x / cell)), static_cast<int>(std::floor(y / cell))};
    }
    void insert(double x, double y, int id) { buckets[key(x, y)].push_back(id); }
    template <class F>
    void for_near(double x, double y, F&& f) const {
        const auto [ci, cj] = key(x, y);
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                const auto it = buckets.find({ci + di, cj + dj});
                if (it == buckets.end()) continue;
                for (int id : it->second) f(id);
            }
    }
};

}  // namespace

TubularChart build_chart(const ScalarField& field, const LevelCurve& curve, double reach) {
    const DomainGrid& g = field.grid();
    const double h = g.h();
    if (curve.size() < 2) throw Error("build_chart: curve needs at least two vertices");
    if (!(reach > 2.0 * h)) throw Error("build_chart: need reach > 2h");

    TubularChart chart;
    chart.curve = curve;
    chart.periodic = curve.closed;
    chart.h = h;

    const int n_seg = curve.size() - 1;
    std::vector<SegmentGeometry> segs(n_seg);
    std::vector<double> seg_s0(n_seg);
    double arc = 0.0;
    for (int k = 0; k < n_seg; ++k) {
        SegmentGeometry& s = segs[k];
        s.ax = curve.xs[k];
        s.ay = curve.ys[k];
        s.bx = curve.xs[k + 1];
        s.by = curve.ys[k + 1];
        s.len = std::hypot(s.bx - s.ax, s.by - s.ay);
        if (s.len > 0) {
            s.tx = (s.bx - s.ax) / s.len;
            s.ty = (s.by - s.ay) / s.len;
        } else {
            s.tx = 1.0;
            s.ty = 0.0;
        }
        seg_s0[k] = arc;
        arc += s.len;
    }
    chart.total_length = arc;

    // self-distance: vertex pairs whose arclength separation is much larger
    // than their spatial distance mean the curve doubles back on itself;
    // pairs on the same smooth piece (arc comparable to chord) do not count.
    // Pairs further apart than 2*reach cannot shrink the reach, so a bucket
    // query of that radius sees every pair that matters.
    double self_dist = std::numeric_limits<double>::infinity();
    {
        std::vector<double> vs(curve.size());
        for (int k = 0; k < n_seg; ++k) vs[k] = seg_s0[k];
        vs[curve.size() - 1] = arc;
        BucketGrid verts;
        verts.cell = 2.0 * reach + h;
        for (int a = 0; a < curve.size(); ++a) verts.insert(curve.xs[a], curve.ys[a], a);
        for (int a = 0; a < curve.size(); ++a) {
            verts.for_near(curve.xs[a], curve.ys[a], [&](int b) {
                if (b <= a) return;
                double ds = vs[b] - vs[a];
                if (chart.periodic) ds = std::min(ds, arc - ds);
                const double d = std::hypot(curve.xs[a] - curve.xs[b], curve.ys[a] - curve.ys[b]);
                if (ds <= 4.0 * h + 2.0 * d) return;
                self_dist = std::min(self_dist, d);
            });
        }
    }
    if (self_dist < 4.0 * h) {
        std::ostringstream msg;
        msg << "build_chart: curve self-distance " << self_dist << " is below 4h = " << 4.0 * h;
        throw StripTooTightError(msg.str());
    }
    const double diag = std::hypot((g.nx() - 1) * h, (g.ny() - 1) * h);
    double eff_reach = std::min({reach, 0.5 * self_dist, diag});

    // candidate nodes: bounding box of the curve inflated by the reach
    double xmin = curve.xs[0], xmax = curve.xs[0], ymin = curve.ys[0], ymax = curve.ys[0];
    for (int k = 0; k < curve.size(); ++k) {
        xmin = std::min(xmin, curve.xs[k]);
        xmax = std::max(xmax, curve.xs[k]);
        ymin = std::min(ymin, curve.ys[k]);
        ymax = std::max(ymax, curve.ys[k]);
    }
    const int i_lo = std::max(0, static_cast<int>(std::floor((xmin - eff_reach - g.x0()) / h)));
    const int i_hi = std::min(g.nx() - 1,
                              static_cast<int>(std::ceil((xmax + eff_reach - g.x0()) / h)));
    const int j_lo = std::max(0, static_cast<int>(std::floor((ymin - eff_reach - g.y0()) / h)));
    const int j_hi = std::min(g.ny() - 1,
                              static_cast<int>(std::ceil((ymax + eff_reach - g.y0()) / h)));

    std::vector<double> seg_mid(n_seg);
    for (int k = 0; k < n_seg; ++k) seg_mid[k] = seg_s0[k] + 0.5 * segs[k].len;
    auto arc_apart = [&](int ka, int kb) {
        double d = std::abs(seg_mid[ka] - seg_mid[kb]);
        if (chart.periodic) d = std::min(d, arc - d);
        return d;
    };

    // bucket the segments by midpoint; the cell size guarantees every segment
    // within eff_reach of a query node shows up in its 3x3 neighborhood
    BucketGrid seg_grid;
    {
        double max_len = 0.0;
        for (const SegmentGeometry& s : segs) max_len = std::max(max_len, s.len);
        seg_grid.cell = eff_reach + 0.5 * max_len + h;
        for (int k = 0; k < n_seg; ++k)
            seg_grid.insert(0.5 * (segs[k].ax + segs[k].bx), 0.5 * (segs[k].ay + segs[k].by), k);
    }

    struct Candidate {
        int node;
        double s, y, dist;
        int segment;
    };
    std::vector<Candidate> candidates;
    for (int j = j_lo; j <= j_hi; ++j) {
        for (int i = i_lo; i <= i_hi; ++i) {
            if (!g.node_in(i, j)) continue;
            const int n = g.node_index(i, j);
            const double px = g.node_x(n), py = g.node_y(n);
            double best = std::numeric_limits<double>::infinity();
            double best_tau = 0.0;
            int best_seg = -1;
            // a projection is ambiguous when a genuinely distant part of the
            // curve comes as close as the nearest segment; segments whose
            // arclength separation is comparable to their spatial distance
            // belong to the same smooth piece
            double second_far = std::numeric_limits<double>::infinity();
            seg_grid.for_near(px, py, [&](int k) {
                double tau;
                const double d = point_segment_distance(segs[k], px, py, tau);
                if (d < best) {
                    best = d;
                    best_tau = tau;
                    best_seg = k;
                }
            });
            if (best_seg < 0 || best >= eff_reach) continue;
            seg_grid.for_near(px, py, [&](int k) {
                double tau;
                const double d = point_segment_distance(segs[k], px, py, tau);
                if (arc_apart(k, best_seg) <= 4.0 * h + 2.0 * d) return;
                second_far = std::min(second_far, d);
            });
            if (second_far - best <= 0.1 * h) {
                // ambiguous projection: drop the node and pull the reach in
                eff_reach = std::min(eff_reach, best);
                continue;
            }
            const SegmentGeometry& s = segs[best_seg];
            const double qx = s.ax + best_tau * (s.bx - s.ax);
            const double qy = s.ay + best_tau * (s.by - s.ay);
            const double cross = s.tx * (py - qy) - s.ty * (px - qx);
            Candidate cand;
            cand.node = n;
            cand.segment = best_seg;
            cand.s = seg_s0[best_seg] + best_tau * s.len;
            cand.y = cross >= 0 ? best : -best;
            cand.dist = best;
            candidates.push_back(cand);
        }
    }

    // orient so that the side with larger field values is y > 0
    double mean_plus = 0.0, mean_minus = 0.0;
    int n_plus = 0, n_minus = 0;
    for (const Candidate& c : candidates) {
        if (c.dist >= eff_reach) continue;
        if (c.y > 0) {
            mean_plus += field[c.node];
            ++n_plus;
        } else if (c.y < 0) {
            mean_minus += field[c.node];
            ++n_minus;
        }
    }
    bool flip = false;
    if (n_plus > 0 && n_minus > 0) flip = mean_plus / n_plus < mean_minus / n_minus;
    chart.flipped = flip;

    chart.reach = eff_reach;
    chart.entry_of_node.assign(g.node_count(), -1);
    for (const Candidate& c : candidates) {
        if (c.dist >= eff_reach) continue;
        TubularChart::Entry e;
        e.node = c.node;
        e.s = c.s;
        e.y = flip ? -c.y : c.y;
        e.segment = c.segment;
        chart.entry_of_node[c.node] = static_cast<int>(chart.entries.size());
        chart.entries.push_back(e);
    }
    chart.seg_tx.resize(n_seg);
    chart.seg_ty.resize(n_seg);
    chart.seg_nx.resize(n_seg);
    chart.seg_ny.resize(n_seg);
    for (int k = 0; k < n_seg; ++k) {
        chart.seg_tx[k] = segs[k].tx;
        chart.seg_ty[k] = segs[k].ty;
        // left normal, then the orientation flip
        double nxk = -segs[k].ty, nyk = segs[k].tx;
        if (flip) {
            nxk = -nxk;
            nyk = -nyk;
        }
        chart.seg_nx[k] = nxk;
        chart.seg_ny[k] = nyk;
    }
    return chart;
}

SideClassification classify_sides(const ScalarField& field, const TubularChart& chart,
                                  double t, double tol) {
    bool above_plus = false, below_plus = false;
    bool above_minus = false, below_minus = false;
    // nodes closer to the polyline than half a cell have no reliable side:
    // the extracted polyline itself wanders O(h^2) around the true curve
    const double collar = 0.5 * chart.h;
    for (const TubularChart::Entry& e : chart.entries) {
        if (std::abs(e.y) < collar) continue;
        const double d = field[e.node] - t;
        if (e.y > 0) {
            above_plus = above_plus || d > tol;
            below_plus = below_plus || d < -tol;
        } else if (e.y < 0) {
            above_minus = above_minus || d > tol;
            below_minus = below_minus || d < -tol;
        }
    }
    if ((above_plus && below_plus) || (above_minus && below_minus))
        throw SideClassificationError(
            "classify_sides: mixed signs on one strip side; the curve is not a clean level "
            "component");

    const int sign_plus = above_plus ? +1 : (below_plus ? -1 : 0);
    const int sign_minus = above_minus ? +1 : (below_minus ? -1 : 0);

    SideClassification out;
    if (sign_plus == 0 && sign_minus == 0) {
        out.kind = SmoothingCase::AllFlat;
        return out;
    }
    if (sign_plus != 0 && sign_minus != 0) {
        if (sign_plus == sign_minus) {
            if (chart.periodic)
                throw SideClassificationError(
                    "classify_sides: same-sign sides on a closed curve violate monotonicity "
                    "upstream");
            out.kind = SmoothingCase::SameSignExp;
            out.active_is_plus = true;
            out.active_sign = sign_plus;
            return out;
        }
        out.kind = SmoothingCase::TwoSided;
        out.active_is_plus = sign_plus > 0;
        out.active_sign = sign_plus;  // +1 once the chart orientation holds
        return out;
    }
    out.kind = SmoothingCase::OneSidedExp;
    out.active_is_plus = sign_plus != 0;
    out.active_sign = sign_plus != 0 ? sign_plus : sign_minus;
    return out;
}

SmoothingProfile fit_profile(const ScalarField& field, const TubularChart& chart,
                             const SideClassification& sides, double safety,
                             double beta_cap) {
    if (!(safety > 0.0 && safety < 1.0))
        throw Error("fit_profile: safety must lie in (0, 1)");
    SmoothingProfile profile;
    profile.safety = safety;
    profile.sides = sides;
    const double h = chart.h;
    double beta = 0.5 * chart.reach;
    if (beta_cap > 0) beta = std::min(beta, beta_cap);
    if (sides.kind == SmoothingCase::AllFlat) {
        profile.beta = std::max(beta, 0.0);
        return profile;
    }

    const VectorField grad = gradient(field);
    const DomainGrid& g = field.grid();
    auto node_gradient = [&](int n, double& gx, double& gy) {
        const int i = g.node_i(n), j = g.node_j(n);
        gx = gy = 0.0;
        int count = 0;
        for (int dj = -1; dj <= 0; ++dj) {
            for (int di = -1; di <= 0; ++di) {
                if (!g.cell_in(i + di, j + dj)) continue;
                const int c = g.cell_index(i + di, j + dj);
                gx += grad.gx(c);
                gy += grad.gy(c);
                ++count;
            }
        }
        if (count > 0) {
            gx /= count;
            gy /= count;
        }
    };

    auto side_active = [&](double y) {
        if (sides.kind == SmoothingCase::TwoSided || sides.kind == SmoothingCase::SameSignExp)
            return y != 0.0;
        return sides.active_is_plus ? y > 0.0 : y < 0.0;
    };

    double global_max_grad = 0.0;
    for (int c : g.cells()) global_max_grad = std::max(global_max_grad, grad.norm(c));
    const double floor = 1e-4 * global_max_grad;

    while (true) {
        if (beta < 4.0 * h)
            throw DegenerateProfileError(
                "fit_profile: normal derivative is not bounded away from zero on any strip of "
                "half-width >= 4h");
        double min_uy = std::numeric_limits<double>::infinity();
        double max_uy = 0.0, max_us = 0.0;
        int strip_count = 0;
        for (const TubularChart::Entry& e : chart.entries) {
            if (std::abs(e.y) >= beta || !side_active(e.y)) continue;
            double gx, gy;
            node_gradient(e.node, gx, gy);
            const double uy = gx * chart.seg_nx[e.segment] + gy * chart.seg_ny[e.segment];
            const double us = gx * chart.seg_tx[e.segment] + gy * chart.seg_ty[e.segment];
            min_uy = std::min(min_uy, std::abs(uy));
            max_uy = std::max(max_uy, std::abs(uy));
            max_us = std::max(max_us, std::abs(us));
            ++strip_count;
        }
        if (strip_count == 0 || min_uy <= floor) {
            beta *= 0.75;
            continue;
        }
        profile.beta = beta;
        profile.gamma = (1.0 - safety) * min_uy;
        profile.delta = (1.0 + safety) * std::max(max_uy, max_us);
        return profile;
    }
}

ScalarField apply_smoothing(const ScalarField& field, const TubularChart& chart,
                            const SmoothingProfile& profile, double t) {
    ScalarField out = field;
    if (profile.sides.kind == SmoothingCase::AllFlat) return out;
    if (profile.beta > chart.reach)
        throw Error("apply_smoothing: strip is wider than the chart coverage");
    if (profile.sides.kind == SmoothingCase::SameSignExp && chart.periodic)
        throw SideClassificationError("apply_smoothing: SameSignExp on a closed curve");

    const double beta = profile.beta;
    const double gamma = profile.gamma;
    const int sigma = profile.sides.active_sign;

    for (const TubularChart::Entry& e : chart.entries) {
        const double ay = std::abs(e.y);
        const double s = ay / beta;
        if (s >= 1.0) continue;
        const double u = field[e.node];
        const double a = alpha_profile(s);
        double value = u;
        switch (profile.sides.kind) {
            case SmoothingCase::TwoSided:
                value = t + a * (u - t) + (1.0 - a) * e.y * gamma * sigma;
                break;
            case SmoothingCase::OneSidedExp: {
                const bool on_active = profile.sides.active_is_plus ? e.y > 0 : e.y < 0;
                if (!on_active) break;
                const double yh = ay / beta;
                const double model = yh < 1.0 / 40.0 ? 0.0 : std::exp(-1.0 / yh);
                value = t + sigma * (a * sigma * (u - t) + (1.0 - a) * model * gamma);
                break;
            }
            case SmoothingCase::SameSignExp: {
                if (e.y == 0.0) {
                    value = t;
                    break;
                }
                const double yh = ay / beta;
                const double model = yh < 1.0 / 40.0 ? 0.0 : std::exp(-1.0 / yh);
                value = t + sigma * (a * sigma * (u - t) + (1.0 - a) * model * gamma);
                break;
            }
            case SmoothingCase::AllFlat:
                break;
        }
        out[e.node] = value;
    }
    return out;
}

double bilinear_sample(const ScalarField& field, double x, double y) {
    const DomainGrid& g = field.grid();
    const double fi = (x - g.x0()) / g.h();
    const double fj = (y - g.y0()) / g.h();
    if (fi < 0.0 || fi > g.nx() - 1 || fj < 0.0 || fj > g.ny() - 1)
        return std::numeric_limits<double>::quiet_NaN();
    int i = static_cast<int>(std::floor(fi));
    int j = static_cast<int>(std::floor(fj));
    i = std::clamp(i, 0, g.nx() - 2);
    j = std::clamp(j, 0, g.ny() - 2);
    if (!g.cell_in(i, j)) return std::numeric_limits<double>::quiet_NaN();
    const double tx = fi - i, ty = fj - j;
    const double v00 = field.at(i, j), v10 = field.at(i + 1, j);
    const double v01 = field.at(i, j + 1), v11 = field.at(i + 1, j + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 +
           tx * ty * v11;
}

double kink_across_curve(const ScalarField& field, const LevelCurve& curve, double offset) {
    const int n = curve.size();
    if (n < 2) return 0.0;
    double worst = 0.0;
    for (int k = 0; k < n - 1; ++k) {
        const double mx = 0.5 * (curve.xs[k] + curve.xs[k + 1]);
        const double my = 0.5 * (curve.ys[k] + curve.ys[k + 1]);
        double tx = curve.xs[k + 1] - curve.xs[k];
        double ty = curve.ys[k + 1] - curve.ys[k];
        const double len = std::hypot(tx, ty);
        if (len == 0) continue;
        tx /= len;
        ty /= len;
        const double nx = -ty, ny = tx;
        const double f0 = bilinear_sample(field, mx, my);
        const double fp = bilinear_sample(field, mx + offset * nx, my + offset * ny);
        const double fm = bilinear_sample(field, mx - offset * nx, my - offset * ny);
        if (!std::isfinite(f0) || !std::isfinite(fp) || !std::isfinite(fm)) continue;
        const double dplus = (fp - f0) / offset;
        const double dminus = (f0 - fm) / offset;
        worst = std::max(worst, std::abs(dplus - dminus));
    }
    return worst;
}

}  // namespace monofield
