#pragma once

#include <string>
#include <vector>

#include "monofield/grid.hpp"
#include "monofield/levelset.hpp"

namespace monofield {

/// The fixed cutoff profile: 0 for t <= 1/2, 1 for t >= 1, the cubic Hermite
/// blend in between. Its slope stays within [0, 3], inside the required
/// [0, 4] envelope.
double alpha_profile(double t);
double alpha_profile_slope(double t);

/// Arclength-and-signed-normal coordinates on a strip around a level curve.
/// y > 0 is the side with the larger field values (the B+ side). The offset
/// map is injective for |y| < reach; nodes with ambiguous projection were
/// excluded and reach shrunk accordingly.
struct TubularChart {
    struct Entry {
        int node = -1;
        double s = 0.0;      // arclength of the projection
        double y = 0.0;      // signed normal distance
        int segment = 0;     // nearest polyline segment
    };

    LevelCurve curve;
    bool periodic = false;
    double reach = 0.0;
    double h = 0.0;
    double total_length = 0.0;
    bool flipped = false;  // geometric normal was inverted to honor the sign convention
    std::vector<Entry> entries;
    std::vector<int> entry_of_node;  // node index -> entry position or -1
    std::vector<double> seg_tx, seg_ty;  // unit tangent per segment (post-flip data)
    std::vector<double> seg_nx, seg_ny;  // unit left normal per segment

    std::string to_json() const;
};

/// Builds the chart by projecting every masked node within `reach` of the
/// polyline onto its nearest segment. Throws StripTooTightError when the
/// curve comes within 4h of itself (non-adjacent segments).
TubularChart build_chart(const ScalarField& field, const LevelCurve& curve, double reach);

enum class SmoothingCase { TwoSided, OneSidedExp, SameSignExp, AllFlat };

std::string to_string(SmoothingCase c);

struct SideClassification {
    SmoothingCase kind = SmoothingCase::AllFlat;
    bool active_is_plus = true;  // which side the exponential cases act on
    int active_sign = +1;        // sign of u - t on the active side
};

/// Sign pattern of u - t on the two strip sides:
///   TwoSided     u > t on y > 0 and u < t on y < 0
///   OneSidedExp  one side stays on the level, the other is one-signed
///   SameSignExp  both sides strictly the same sign (open curves only)
///   AllFlat      both sides stay on the level
/// Mixed signs on one side, or SameSignExp on a periodic chart, throw
/// SideClassificationError.
SideClassification classify_sides(const ScalarField& field, const TubularChart& chart,
                                  double t, double tol);

struct SmoothingProfile {
    double beta = 0.0;   // strip half-width
    double gamma = 0.0;  // lower normal-derivative envelope
    double delta = 0.0;  // upper envelope for both derivative components
    double safety = 0.0;
    SideClassification sides;
    std::string to_json() const;
};

/// Measures the field's normal and tangential derivatives on the candidate
/// strip and fits the envelopes:
///   gamma = (1-safety) * min |du/dy|,  delta = (1+safety) * max(|du/dy|, |du/ds|).
/// beta starts at min(reach/2, beta_cap) and shrinks while the normal
/// derivative is not bounded away from zero; below 4h the profile is refused.
SmoothingProfile fit_profile(const ScalarField& field, const TubularChart& chart,
                             const SideClassification& sides, double safety,
                             double beta_cap = -1.0);

/// Applies the smoothing kernel inside the strip {|y| < beta}, writing
///   TwoSided     u~ = t + a(s)(u-t) + (1-a(s)) y gamma
///   OneSidedExp  u~ = t + sg [ a(s) sg (u-t) + (1-a(s)) exp(-1/(y/beta)) gamma ]
///   SameSignExp  the same with |y|, on both sides
/// with s = |y|/beta. Values at s >= 1 are returned bit-for-bit unchanged.
ScalarField apply_smoothing(const ScalarField& field, const TubularChart& chart,
                            const SmoothingProfile& profile, double t);

/// Bilinear interpolation of the field at (x, y); the containing cell must be
/// masked. Returns NaN outside.
double bilinear_sample(const ScalarField& field, double x, double y);

/// Max jump of the one-sided normal derivatives across the curve, probed at
/// +-offset along the vertex normals. Vertices whose probes leave the mask
/// are skipped. The discrete surrogate for a C^1 defect along the curve.
double kink_across_curve(const ScalarField& field, const LevelCurve& curve, double offset);

}  // namespace monofield
