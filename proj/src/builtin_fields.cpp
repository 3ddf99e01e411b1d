#include "monofield/builtin_fields.hpp"

#include <cmath>

namespace monofield {

static GridPtr annulus_grid(int res) {
    const double h = 2.0 / (res - 1);
    return DomainGrid::from_predicate(res, res, h, -1.0, -1.0, [](double x, double y) {
        const double r = std::hypot(x, y);
        return r >= 0.25 && r <= 1.0;
    });
}

ScalarField make_builtin(const std::string& name, int resolution) {
    const int res = resolution;
    if (res < 3) throw Error("make_builtin: resolution must be at least 3");
    if (name == "linear") {
        auto grid = DomainGrid::rectangle(res, res, 1.0 / (res - 1), 0.0, 0.0);
        return sample_analytic([](double x, double) { return x; }, grid);
    }
    if (name == "saddle") {
        auto grid = DomainGrid::rectangle(res, res, 2.0 / (res - 1), -1.0, -1.0);
        return sample_analytic([](double x, double y) { return x * x - y * y; }, grid);
    }
    if (name == "radial-annulus") {
        return sample_analytic([](double x, double y) { return std::hypot(x, y); },
                               annulus_grid(res));
    }
    if (name == "bowl-disk") {
        const double h = 2.0 / (res - 1);
        auto grid = DomainGrid::from_predicate(
            res, res, h, -1.0, -1.0,
            [](double x, double y) { return x * x + y * y <= 1.0; });
        return sample_analytic([](double x, double y) { return x * x + y * y; }, grid);
    }
    if (name == "log-annulus") {
        return sample_analytic(
            [](double x, double y) { return std::log(4.0 * std::hypot(x, y)) / std::log(4.0); },
            annulus_grid(res));
    }
    if (name == "sine-grid") {
        auto grid = DomainGrid::rectangle(res, res, 2.0 / (res - 1), 0.0, 0.0);
        return sample_analytic(
            [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); }, grid);
    }
    throw Error("make_builtin: unknown builtin field '" + name + "'");
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {
        "linear", "saddle", "radial-annulus", "bowl-disk", "log-annulus", "sine-grid"};
    return names;
}

}  // namespace monofield
