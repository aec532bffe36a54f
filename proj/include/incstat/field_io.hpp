// field_io.hpp
//
// Debug dumps of torus fields. Not a stable format.

#pragma once

#include <iosfwd>
#include <string>

#include "incstat/lattice.hpp"

namespace incstat {

// One line per (site, component): "site,component,value".
void write_field_csv(std::ostream& os, const TorusField& f);
TorusField read_field_csv(std::istream& is, const TorusGeometry& g, int components);

// Raw little-endian header (d, L, components) followed by the doubles.
void write_field_binary(std::ostream& os, const TorusField& f);
TorusField read_field_binary(std::istream& is);

}  // namespace incstat
