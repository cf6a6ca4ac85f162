#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qlnd {

/// Uniform mesh r_j = j*h, j = 0..M, on [0, R] for radial functions in R^N.
class RadialGrid {
public:
  RadialGrid(int dim, double radius, std::size_t nodes);

  int dim() const { return dim_; }
  double radius() const { return radius_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t intervals() const { return nodes_ - 1; }
  double h() const { return h_; }
  double r(std::size_t j) const { return h_ * static_cast<double>(j); }

  /// Weight r^{N-1} at a radius (1 for N = 1, including r = 0).
  double weight(double r) const;

  /// Control-volume mass: exact integral of r^{N-1} over the dual cell of node j.
  double cell_mass(std::size_t j) const;

  /// Same radius and dimension, every other node. Requires an even interval count.
  RadialGrid coarsened() const;
  /// Same radius and dimension, h halved.
  RadialGrid refined() const;

  bool operator==(const RadialGrid &) const = default;

private:
  int dim_;
  double radius_;
  std::size_t nodes_;
  double h_;
};

RadialGrid make_grid(int dim, double radius, std::size_t nodes);

/// Samples of a real function on a RadialGrid.
struct GridFunction {
  RadialGrid grid;
  std::vector<double> values;

  explicit GridFunction(RadialGrid g);
  GridFunction(RadialGrid g, std::vector<double> v);

  static GridFunction sample(const RadialGrid &g, const std::function<double(double)> &f);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t j) const { return values[j]; }
  double &operator[](std::size_t j) { return values[j]; }

  /// Every other sample, on grid.coarsened().
  GridFunction coarsened() const;
};

/// Composite trapezoid approximation of int_0^R f(r) r^{N-1} dr.
double quad_weighted(const GridFunction &f);

/// Trapezoid on (h, 2h) combined by one Richardson step; removes the O(h^2) term.
/// Requires an even interval count.
double quad_weighted_extrapolated(const GridFunction &f);

/// Second-order centered differences inside, second-order one-sided at the ends.
GridFunction fd_derivative(const GridFunction &f);

/// Pointwise product, both on the same grid.
GridFunction operator*(const GridFunction &a, const GridFunction &b);

} // namespace qlnd
