#include "qlnd/radial_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qlnd {

RadialGrid::RadialGrid(int dim, double radius, std::size_t nodes)
    : dim_(dim), radius_(radius), nodes_(nodes), h_(0.0) {
  if (dim < 1)
    throw std::invalid_argument("radial grid: dimension must be >= 1, got " + std::to_string(dim));
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("radial grid: nonpositive radius");
  if (nodes < 17)
    throw std::invalid_argument("radial grid: need at least 17 nodes, got " + std::to_string(nodes));
  h_ = radius / static_cast<double>(nodes - 1);
}

double RadialGrid::weight(double r) const {
  switch (dim_) {
  case 1:
    return 1.0;
  case 2:
    return r;
  case 3:
    return r * r;
  default:
    return std::pow(r, dim_ - 1);
  }
}

double RadialGrid::cell_mass(std::size_t j) const {
  const double n = dim_;
  const double lo = j == 0 ? 0.0 : r(j) - 0.5 * h_;
  const double hi = j + 1 == nodes_ ? r(j) : r(j) + 0.5 * h_;
  if (dim_ == 1)
    return hi - lo;
  return (std::pow(hi, n) - std::pow(lo, n)) / n;
}

RadialGrid RadialGrid::coarsened() const {
  if (intervals() % 2 != 0)
    throw std::invalid_argument("radial grid: cannot coarsen an odd interval count");
  return RadialGrid(dim_, radius_, intervals() / 2 + 1);
}

RadialGrid RadialGrid::refined() const { return RadialGrid(dim_, radius_, 2 * intervals() + 1); }

RadialGrid make_grid(int dim, double radius, std::size_t nodes) { return RadialGrid(dim, radius, nodes); }

GridFunction::GridFunction(RadialGrid g) : grid(g), values(g.nodes(), 0.0) {}

GridFunction::GridFunction(RadialGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.nodes())
    throw std::invalid_argument("grid function: length does not match grid");
  for (double x : values)
    if (!std::isfinite(x))
      throw std::invalid_argument("grid function: non-finite sample");
}

GridFunction GridFunction::sample(const RadialGrid &g, const std::function<double(double)> &f) {
  std::vector<double> v(g.nodes());
  for (std::size_t j = 0; j < v.size(); ++j)
    v[j] = f(g.r(j));
  return GridFunction(g, std::move(v));
}

GridFunction GridFunction::coarsened() const {
  RadialGrid cg = grid.coarsened();
  std::vector<double> v(cg.nodes());
  for (std::size_t j = 0; j < v.size(); ++j)
    v[j] = values[2 * j];
  return GridFunction(cg, std::move(v));
}

double quad_weighted(const GridFunction &f) {
  const RadialGrid &g = f.grid;
  const std::size_t last = g.nodes() - 1;
  double sum = 0.5 * (f[0] * g.weight(0.0) + f[last] * g.weight(g.r(last)));
  for (std::size_t j = 1; j < last; ++j)
    sum += f[j] * g.weight(g.r(j));
  return sum * g.h();
}

double quad_weighted_extrapolated(const GridFunction &f) {
  const double fine = quad_weighted(f);
  const double coarse = quad_weighted(f.coarsened());
  return fine + (fine - coarse) / 3.0;
}

GridFunction fd_derivative(const GridFunction &f) {
  const std::size_t n = f.size();
  if (n < 3)
    throw std::invalid_argument("fd_derivative: need at least 3 nodes");
  const double h = f.grid.h();
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t j = 1; j + 1 < n; ++j)
    d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return GridFunction(f.grid, std::move(d));
}

GridFunction operator*(const GridFunction &a, const GridFunction &b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("grid function product: grid mismatch");
  std::vector<double> v(a.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    v[j] = a[j] * b[j];
  return GridFunction(a.grid, std::move(v));
}

} // namespace qlnd
