#include "bilab/signal.hpp"

#include <iomanip>
#include <regex>

namespace bilab {

RealFunction indicator(const Mesh& mesh, const DyadicRectangle& r) {
  check_axis(mesh, r.first, Axis::first);
  check_axis(mesh, r.second, Axis::second);
  return tensor<double>(mesh, r.first.indicator(), r.second.indicator());
}

RealFunction haar_function(const Mesh& mesh, const HaarIndex& hx, const HaarIndex& hy) {
  check_axis(mesh, hx.cube, Axis::first);
  check_axis(mesh, hy.cube, Axis::second);
  return tensor<double>(mesh, haar_values(hx), haar_values(hy));
}

std::vector<DyadicCube> descendants(const DyadicCube& k, int depth) {
  if (depth < 0 || k.level + depth > k.resolution) throw ResolutionError("descendant depth exceeds resolution");
  std::vector<DyadicCube> cur{k};
  for (int d = 0; d < depth; ++d) {
    std::vector<DyadicCube> next;
    next.reserve(cur.size() << k.dim);
    for (const DyadicCube& q : cur) {
      for (const DyadicCube& c : children(q)) next.push_back(c);
    }
    cur = std::move(next);
  }
  return cur;
}

void write_csv(std::ostream& os, const RealFunction& f) {
  os << "# bilab-grid-function v" << grid_function_format << " n=" << f.mesh().n << " m=" << f.mesh().m
     << " L=" << f.mesh().levels << " scalar=real\n";
  os << std::setprecision(17);
  for (Index r = 0; r < f.values().rows(); ++r) {
    for (Index c = 0; c < f.values().cols(); ++c) {
      if (c) os << ',';
      os << f(r, c);
    }
    os << '\n';
  }
}

RealFunction read_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  static const std::regex header(R"(# bilab-grid-function v(\d+) n=(\d+) m=(\d+) L=(\d+) scalar=real)");
  std::smatch m;
  if (!std::regex_match(line, m, header)) throw std::runtime_error("bad grid function CSV header");
  if (std::stoi(m[1]) != grid_function_format) throw std::runtime_error("unsupported grid function version");
  Mesh mesh{std::stoi(m[4]), std::stoi(m[2]), std::stoi(m[3])};
  mesh.validate();
  RealFunction f(mesh);
  for (Index r = 0; r < f.values().rows(); ++r) {
    if (!std::getline(is, line)) throw std::runtime_error("truncated grid function CSV");
    std::stringstream ss(line);
    std::string cell;
    for (Index c = 0; c < f.values().cols(); ++c) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("short grid function CSV row");
      f(r, c) = std::stod(cell);
    }
  }
  return f;
}

}  // namespace bilab
