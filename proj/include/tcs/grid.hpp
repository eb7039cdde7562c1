#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcs/errors.hpp"
#include "tcs/io.hpp"

namespace tcs {

// Uniform periodic box in 1 or 2 dimensions.  Axis a holds points
// lo(a) + j*h_a for j = 0..n_a-1 with h_a = (hi(a)-lo(a))/n_a; the right
// edge is identified with the left one.  Flattened indices are row-major
// (axis 0 slowest), matching FFTW's layout.
struct Grid {
  Eigen::VectorXd lo, hi;
  std::vector<int> points;

  Grid() = default;
  Grid(Eigen::VectorXd lo_, Eigen::VectorXd hi_, std::vector<int> points_)
      : lo(std::move(lo_)), hi(std::move(hi_)), points(std::move(points_)) {
    const int d = dim();
    if (d < 1 || d > 2) throw std::invalid_argument("grid must be 1- or 2-dimensional");
    if (hi.size() != d || static_cast<int>(points.size()) != d)
      throw std::invalid_argument("grid fields must agree in dimension");
    for (int a = 0; a < d; ++a) {
      if (!(hi(a) > lo(a))) throw std::invalid_argument("box must have positive extent");
      const int n = points[a];
      if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("points per axis must be a power of two >= 2");
    }
  }

  int dim() const { return static_cast<int>(lo.size()); }
  double spacing(int a) const { return (hi(a) - lo(a)) / points[a]; }

  std::size_t total_points() const {
    std::size_t m = 1;
    for (int n : points) m *= static_cast<std::size_t>(n);
    return m;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= spacing(a);
    return v;
  }

  Eigen::VectorXd point(std::size_t idx) const {
    Eigen::VectorXd x(dim());
    if (dim() == 1) {
      x(0) = lo(0) + static_cast<double>(idx) * spacing(0);
    } else {
      const std::size_t n1 = static_cast<std::size_t>(points[1]);
      x(0) = lo(0) + static_cast<double>(idx / n1) * spacing(0);
      x(1) = lo(1) + static_cast<double>(idx % n1) * spacing(1);
    }
    return x;
  }

  bool same_as(const Grid& o) const {
    if (dim() != o.dim() || points != o.points) return false;
    for (int a = 0; a < dim(); ++a) {
      const double scale = std::max({1.0, std::abs(lo(a)), std::abs(hi(a))});
      if (std::abs(lo(a) - o.lo(a)) > 1e-12 * scale) return false;
      if (std::abs(hi(a) - o.hi(a)) > 1e-12 * scale) return false;
    }
    return true;
  }
};

struct ComplexField {
  Grid grid;
  Eigen::VectorXcd values;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) throw GridMismatch("fields live on different grids");
}

// Discrete L2 norm with the uniform periodic weight h^N (trapezoid and
// midpoint coincide on a periodic grid).
inline double l2_norm(const ComplexField& f) {
  return std::sqrt(f.values.squaredNorm() * f.grid.cell_volume());
}

inline double l2_distance(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f.grid, g.grid);
  return std::sqrt((f.values - g.values).squaredNorm() * f.grid.cell_volume());
}

inline std::complex<double> inner_product(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f.grid, g.grid);
  return f.values.dot(g.values) * f.grid.cell_volume();
}

// Probability mass sitting in the outermost cell layer of the box.
inline double boundary_mass(const ComplexField& f) {
  const Grid& g = f.grid;
  double s = 0.0;
  if (g.dim() == 1) {
    const std::size_t n = g.total_points();
    s = std::norm(f.values(0)) + std::norm(f.values(n - 1));
  } else {
    const int n0 = g.points[0], n1 = g.points[1];
    for (int j = 0; j < n1; ++j) {
      s += std::norm(f.values(j));
      s += std::norm(f.values(static_cast<std::size_t>(n0 - 1) * n1 + j));
    }
    for (int i = 1; i + 1 < n0; ++i) {
      s += std::norm(f.values(static_cast<std::size_t>(i) * n1));
      s += std::norm(f.values(static_cast<std::size_t>(i) * n1 + n1 - 1));
    }
  }
  return s * g.cell_volume();
}

// CSV with a leading grid header so exported fields can be read back exactly.
inline void write_field_csv(std::ostream& os, const ComplexField& f) {
  const Grid& g = f.grid;
  os << "# grid dim=" << g.dim();
  os << " lo=";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << fmt_double(g.lo(a));
  os << " hi=";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << fmt_double(g.hi(a));
  os << " points=";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << g.points[a];
  os << '\n';
  std::vector<std::string> names;
  for (int a = 0; a < g.dim(); ++a) names.push_back("x" + std::to_string(a));
  names.push_back("re");
  names.push_back("im");
  write_csv_header(os, names);
  std::vector<double> row;
  for (std::size_t i = 0; i < g.total_points(); ++i) {
    row.clear();
    const Eigen::VectorXd x = g.point(i);
    for (int a = 0; a < g.dim(); ++a) row.push_back(x(a));
    row.push_back(f.values(i).real());
    row.push_back(f.values(i).imag());
    write_csv_row(os, row);
  }
}

inline ComplexField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# grid", 0) != 0)
    throw ConfigError("field file: missing '# grid' header");
  auto grab = [&](const std::string& key) {
    const auto pos = line.find(key + "=");
    if (pos == std::string::npos) throw ConfigError("field file: header lacks " + key);
    auto end = line.find(' ', pos);
    return line.substr(pos + key.size() + 1,
                       end == std::string::npos ? std::string::npos : end - pos - key.size() - 1);
  };
  auto split_csv = [](const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
  };
  const int dim = std::stoi(grab("dim"));
  const auto lo = split_csv(grab("lo"));
  const auto hi = split_csv(grab("hi"));
  const auto pts = split_csv(grab("points"));
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim ||
      static_cast<int>(pts.size()) != dim)
    throw ConfigError("field file: inconsistent grid header");
  Eigen::VectorXd vlo(dim), vhi(dim);
  std::vector<int> vpts(dim);
  for (int a = 0; a < dim; ++a) {
    vlo(a) = lo[a];
    vhi(a) = hi[a];
    vpts[a] = static_cast<int>(pts[a]);
  }
  ComplexField f;
  f.grid = Grid(vlo, vhi, vpts);
  f.values.resize(static_cast<Eigen::Index>(f.grid.total_points()));
  if (!std::getline(is, line)) throw ConfigError("field file: missing column header");
  std::size_t i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (static_cast<int>(cols.size()) != dim + 2)
      throw ConfigError("field file: bad column count");
    if (i >= f.grid.total_points()) throw ConfigError("field file: too many rows");
    f.values(static_cast<Eigen::Index>(i)) = {cols[dim], cols[dim + 1]};
    ++i;
  }
  if (i != f.grid.total_points()) throw ConfigError("field file: too few rows");
  return f;
}

}  // namespace tcs
