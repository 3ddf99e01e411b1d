#pragma once

#include <map>
#include <utility>
#include <vector>

#include "monofield/grid.hpp"

namespace monofield {

/// Level schedule {t_i} together with the band regions u^{-1}((t_i, t_{i+1}))
/// and the on-level node sets. bands.size() == levels.size() + 1: band 0 is
/// u < t_0 and the last band is u > t_last. Bands and level nodes partition
/// the masked nodes.
struct BandPartition {
    std::vector<double> levels;                  // strictly increasing
    std::vector<std::vector<int>> bands;         // sorted node indices per band
    std::vector<std::vector<int>> level_nodes;   // |u - t_i| <= snap
    double snap = 0.0;

    int band_of_value(double v) const;
};

/// Builds the partition of `u` along `levels`. Nodes within snap of a level
/// become level nodes; every other node goes to the band its value lies in.
BandPartition build_band_partition(const ScalarField& u, std::vector<double> levels,
                                   double snap);

/// Thin value intervals (t_j^-, t_j^+) straddling each original level, with
/// the lens regions v^{-1}((t_j^-, t_j^+)).
struct LensPartition {
    std::vector<std::pair<double, double>> pairs;  // t_j^- < t_j^+, strictly interleaved
    std::vector<std::vector<int>> lenses;          // sorted node indices per lens
};

/// Key for one 4-connected component of one band (or lens).
struct BandComponentKey {
    int band = 0;
    int component = 0;
    auto operator<=>(const BandComponentKey&) const = default;
};

/// 4-connected components of a band's node set, deterministic order.
std::vector<std::vector<int>> band_components(const DomainGrid& grid,
                                              const std::vector<int>& band_nodes);

}  // namespace monofield
