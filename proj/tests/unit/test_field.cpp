#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "chlab/errors.hpp"
#include "chlab/field.hpp"

using chlab::Grid;
using chlab::ScalarField;

TEST_CASE("construction") {
  const Grid g = Grid::line(5, 1.0);
  ScalarField a(g, 2.0);
  CHECK(a.size() == 5);
  CHECK(a[3] == 2.0);
  CHECK_THROWS_AS(ScalarField(g, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST_CASE("arithmetic and reductions") {
  const Grid g = Grid::line(4, 1.0);
  ScalarField a(g, std::vector<double>{1.0, -3.0, 2.0, 0.5});
  ScalarField b(g, 1.0);
  CHECK((a + b)[1] == -2.0);
  CHECK((a - b)[2] == 1.0);
  CHECK((2.0 * a)[0] == 2.0);
  a.axpy(-2.0, b);
  CHECK(a[3] == -1.5);
  a += 1.0;
  CHECK(a.min() == -4.0);
  CHECK(a.max() == 1.0);
  CHECK(a.sup_norm() == 4.0);
  CHECK(a.all_finite());
  a[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(a.all_finite());
}

TEST_CASE("mixing grids raises GridMismatch") {
  ScalarField a(Grid::line(4, 1.0));
  ScalarField b(Grid::line(5, 1.0));
  CHECK_THROWS_AS(a += b, chlab::GridMismatch);
  CHECK_THROWS_AS(a -= b, chlab::GridMismatch);
  CHECK_THROWS_AS(a.axpy(1.0, b), chlab::GridMismatch);
  CHECK_THROWS_AS(chlab::require_same_grid(a, b), chlab::GridMismatch);
}
