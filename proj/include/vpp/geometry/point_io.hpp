#pragma once

// Point-pattern exchange format: one point per line, whitespace separated
// coordinates, '#' starts a comment. Values are written with 17 significant
// digits so that reading back reproduces every double exactly.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpp/geometry/tessellation.hpp"

namespace vpp::geometry {

inline void write_points(std::ostream& os, const Configuration& config, int dimension,
                         const std::vector<std::string>& header = {}) {
  for (const auto& line : header) os << "# " << line << '\n';
  char buf[64];
  for (const Vec2& p : config.points) {
    std::snprintf(buf, sizeof buf, "%.17g", p.x);
    os << buf;
    if (dimension == 2) {
      std::snprintf(buf, sizeof buf, "%.17g", p.y);
      os << ' ' << buf;
    }
    os << '\n';
  }
}

/// Reads a point pattern; lines must hold 1 or 2 coordinates consistently.
inline Configuration read_points(std::istream& is, int* dimension_out = nullptr) {
  Configuration config;
  std::string line;
  int dimension = 0;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> coords;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        throw std::runtime_error("point file line " + std::to_string(lineno) + ": bad number '" +
                                 tok + "'");
      coords.push_back(v);
    }
    if (coords.empty()) continue;
    if (coords.size() > 2)
      throw std::runtime_error("point file line " + std::to_string(lineno) +
                               ": expected 1 or 2 coordinates");
    const int d = static_cast<int>(coords.size());
    if (dimension == 0) dimension = d;
    if (d != dimension)
      throw std::runtime_error("point file line " + std::to_string(lineno) +
                               ": inconsistent dimension");
    config.points.push_back({coords[0], d == 2 ? coords[1] : 0.0});
  }
  if (dimension_out) *dimension_out = dimension;
  return config;
}

inline Configuration read_points_file(const std::string& path, int* dimension_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_points(in, dimension_out);
}

}  // namespace vpp::geometry
