#pragma once

#include <iosfwd>
#include <string>

#include "monofield/grid.hpp"

namespace monofield {

// Field file format: a JSON document
//   { "nx", "ny", "h", "x0", "y0", "values": [...] }
// with values row-major (j outer, i inner) and null for out-of-domain nodes.

void write_field_json(const ScalarField& field, std::ostream& out);
void write_field_json(const ScalarField& field, const std::string& path);
std::string field_to_json(const ScalarField& field);

ScalarField read_field_json(std::istream& in);
ScalarField read_field_json_file(const std::string& path);
ScalarField field_from_json(const std::string& text);

/// CSV export: header "i,j,x,y,value", one row per masked node, j outer.
void write_field_csv(const ScalarField& field, std::ostream& out);
void write_field_csv(const ScalarField& field, const std::string& path);

}  // namespace monofield
