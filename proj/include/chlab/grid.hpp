#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace chlab {

/// Uniform node-based tensor grid on an axis-aligned box with homogeneous
/// Neumann boundaries. Boundary nodes are part of the grid; the discrete
/// Laplacian uses mirrored ghosts f[-1] = f[1].
///
/// Node storage is row-major with x fastest: idx = ix + nx * (iy + ny * iz).
/// The grid is a cheap handle; copies share the transform plans.
class Grid {
 public:
  Grid(std::vector<int> n_per_axis, std::vector<double> length_per_axis);

  static Grid line(int n, double length) { return Grid({n}, {length}); }

  int ndim() const;
  std::span<const int> n_per_axis() const;
  std::span<const double> lengths() const;
  double spacing(int axis) const;
  std::size_t size() const;
  double volume() const;

  /// Trapezoidal weights; they sum to volume().
  std::span<const double> weights() const;

  /// Coordinate of node index `i` along `axis`.
  double coordinate(int axis, int i) const;
  /// Per-axis index of flat node `idx`.
  int axis_index(std::size_t idx, int axis) const;

  /// Eigenvalues of the 1D mirrored stencil -D2 along `axis`:
  /// (2 - 2 cos(pi k / (n - 1))) / h^2, k = 0..n-1.
  std::span<const double> axis_eigenvalues(int axis) const;
  /// Eigenvalue of -Delta_h for every transform-space index (same layout as nodes).
  std::span<const double> symbol() const;

  /// Applies g(-Delta_h) to `in`, i.e. multiplies each cosine mode by
  /// multiplier[k]. `in` and `out` may alias.
  void apply_multiplier(std::span<const double> in, std::span<const double> multiplier,
                        std::span<double> out) const;

  bool same_shape(const Grid& other) const;
  bool operator==(const Grid& other) const { return same_shape(other); }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace chlab
