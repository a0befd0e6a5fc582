#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chlab/grid.hpp"

namespace chlab {

/// Nodal real values on a Grid.
class ScalarField {
 public:
  explicit ScalarField(Grid grid, double value = 0.0);
  ScalarField(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double s);

  /// this += s * other
  ScalarField& axpy(double s, const ScalarField& other);

  double min() const;
  double max() const;
  double sup_norm() const;
  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Throws GridMismatch when the fields live on different grids.
void require_same_grid(const ScalarField& a, const ScalarField& b);

}  // namespace chlab
