#include "monofield/partition.hpp"

#include <algorithm>
#include <cmath>

namespace monofield {

int BandPartition::band_of_value(double v) const {
    const auto it = std::upper_bound(levels.begin(), levels.end(), v);
    return static_cast<int>(it - levels.begin());
}

BandPartition build_band_partition(const ScalarField& u, std::vector<double> levels,
                                   double snap) {
    for (size_t k = 1; k < levels.size(); ++k)
        if (!(levels[k] > levels[k - 1]))
            throw Error("build_band_partition: levels must be strictly increasing");
    BandPartition part;
    part.levels = std::move(levels);
    part.snap = snap;
    part.bands.assign(part.levels.size() + 1, {});
    part.level_nodes.assign(part.levels.size(), {});

    for (int n : u.grid().nodes()) {
        const double v = u[n];
        bool on_level = false;
        for (size_t k = 0; k < part.levels.size(); ++k) {
            if (std::abs(v - part.levels[k]) <= snap) {
                part.level_nodes[k].push_back(n);
                on_level = true;
                break;
            }
        }
        if (!on_level) part.bands[part.band_of_value(v)].push_back(n);
    }
    return part;
}

std::vector<std::vector<int>> band_components(const DomainGrid& grid,
                                              const std::vector<int>& band_nodes) {
    std::vector<std::uint8_t> in_set(grid.node_count(), 0);
    for (int n : band_nodes) in_set[n] = 1;
    return label_components(grid, in_set);
}

}  // namespace monofield
