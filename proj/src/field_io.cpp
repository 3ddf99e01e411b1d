#include "monofield/field_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace monofield {

using nlohmann::json;

static json field_json(const ScalarField& field) {
    const DomainGrid& g = field.grid();
    json values = json::array();
    for (int n = 0; n < g.node_count(); ++n) {
        if (g.node_in(n))
            values.push_back(field[n]);
        else
            values.push_back(nullptr);
    }
    json doc;
    doc["nx"] = g.nx();
    doc["ny"] = g.ny();
    doc["h"] = g.h();
    doc["x0"] = g.x0();
    doc["y0"] = g.y0();
    doc["values"] = std::move(values);
    return doc;
}

void write_field_json(const ScalarField& field, std::ostream& out) {
    out << field_json(field).dump(2) << "\n";
}

void write_field_json(const ScalarField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_field_json(field, out);
}

std::string field_to_json(const ScalarField& field) { return field_json(field).dump(2); }

static ScalarField field_from(const json& doc) {
    if (!doc.is_object() || !doc.contains("nx") || !doc.contains("ny") || !doc.contains("h") ||
        !doc.contains("x0") || !doc.contains("y0") || !doc.contains("values"))
        throw Error("field JSON: missing one of nx, ny, h, x0, y0, values");
    const int nx = doc.at("nx").get<int>();
    const int ny = doc.at("ny").get<int>();
    const double h = doc.at("h").get<double>();
    const double x0 = doc.at("x0").get<double>();
    const double y0 = doc.at("y0").get<double>();
    const json& vals = doc.at("values");
    if (!vals.is_array() || static_cast<int>(vals.size()) != nx * ny)
        throw Error("field JSON: values must be an array of nx*ny entries");
    std::vector<std::uint8_t> mask(nx * ny, 0);
    std::vector<double> values(nx * ny, std::numeric_limits<double>::quiet_NaN());
    for (int n = 0; n < nx * ny; ++n) {
        if (vals[n].is_null()) continue;
        mask[n] = 1;
        values[n] = vals[n].get<double>();
    }
    auto grid = std::make_shared<DomainGrid>(nx, ny, h, x0, y0, std::move(mask));
    return ScalarField(std::move(grid), std::move(values));
}

ScalarField read_field_json(std::istream& in) {
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(std::string("field JSON parse error: ") + e.what());
    }
    return field_from(doc);
}

ScalarField read_field_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    return read_field_json(in);
}

ScalarField field_from_json(const std::string& text) {
    std::istringstream in(text);
    return read_field_json(in);
}

void write_field_csv(const ScalarField& field, std::ostream& out) {
    const DomainGrid& g = field.grid();
    out << "i,j,x,y,value\n";
    out.precision(17);
    for (int n : g.nodes()) {
        out << g.node_i(n) << "," << g.node_j(n) << "," << g.node_x(n) << "," << g.node_y(n)
            << "," << field[n] << "\n";
    }
}

void write_field_csv(const ScalarField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_field_csv(field, out);
}

}  // namespace monofield
