#pragma once

#include <string>
#include <vector>

#include "monofield/grid.hpp"

namespace monofield {

/// Analytic test fields generated at a configurable resolution (nodes per
/// side) so runs need no data files.
///
///   linear          u = x              on [0,1]^2
///   saddle          u = x^2 - y^2      on [-1,1]^2
///   radial-annulus  u = r              on the annulus 1/4 <= r <= 1
///   bowl-disk       u = x^2 + y^2      on the unit disk
///   log-annulus     u = log(4r)/log 4  on the annulus 1/4 <= r <= 1
///   sine-grid       u = sin(pi x) sin(pi y) on [0,2]^2
ScalarField make_builtin(const std::string& name, int resolution = 128);

const std::vector<std::string>& builtin_names();

}  // namespace monofield
