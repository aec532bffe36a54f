// field_io.cpp

#include "incstat/field_io.hpp"

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace incstat {

void write_field_csv(std::ostream& os, const TorusField& f) {
  os << "site,component,value\n";
  char buf[64];
  for (int c = 0; c < f.components(); ++c) {
    for (std::size_t x = 0; x < f.sites(); ++x) {
      std::snprintf(buf, sizeof buf, "%.17g", f.at(x, c));
      os << x << ',' << c << ',' << buf << '\n';
    }
  }
}

TorusField read_field_csv(std::istream& is, const TorusGeometry& g, int components) {
  TorusField f(g, components);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty field dump");
  std::size_t count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t site = 0;
    int c = 0;
    double v = 0.0;
    char sep1 = 0, sep2 = 0;
    if (!(ls >> site >> sep1 >> c >> sep2 >> v) || sep1 != ',' || sep2 != ',') {
      throw std::runtime_error("malformed field dump line: " + line);
    }
    if (site >= g.sites() || c < 0 || c >= components) {
      throw std::runtime_error("field dump entry out of range: " + line);
    }
    f.at(site, c) = v;
    ++count;
  }
  if (count != g.sites() * static_cast<std::size_t>(components)) {
    throw std::runtime_error("field dump has wrong number of entries");
  }
  return f;
}

void write_field_binary(std::ostream& os, const TorusField& f) {
  const std::int32_t d = f.geometry().dim();
  const std::int64_t L = f.geometry().side();
  const std::int32_t c = f.components();
  os.write(reinterpret_cast<const char*>(&d), sizeof d);
  os.write(reinterpret_cast<const char*>(&L), sizeof L);
  os.write(reinterpret_cast<const char*>(&c), sizeof c);
  auto v = f.values();
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

TorusField read_field_binary(std::istream& is) {
  std::int32_t d = 0, c = 0;
  std::int64_t L = 0;
  is.read(reinterpret_cast<char*>(&d), sizeof d);
  is.read(reinterpret_cast<char*>(&L), sizeof L);
  is.read(reinterpret_cast<char*>(&c), sizeof c);
  if (!is) throw std::runtime_error("truncated field header");
  TorusField f(TorusGeometry(d, L), c);
  auto v = f.values();
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  if (!is) throw std::runtime_error("truncated field data");
  return f;
}

}  // namespace incstat
