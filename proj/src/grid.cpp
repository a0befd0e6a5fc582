#include "chlab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace chlab {

namespace {

// FFTW's planner is not reentrant; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Grid::Impl {
  std::vector<int> n;
  std::vector<double> length;
  std::vector<double> h;
  std::size_t total = 0;
  double volume = 0.0;
  std::vector<double> weights;
  std::vector<std::vector<double>> axis_eig;
  std::vector<double> symbol;
  double dct_scale = 1.0;  // inverse normalization of the multi-d DCT-I pair
  fftw_plan plan = nullptr;

  Impl(std::vector<int> n_in, std::vector<double> l_in)
      : n(std::move(n_in)), length(std::move(l_in)) {
    if (n.empty() || n.size() > 3) {
      throw std::invalid_argument("grid: ndim must be 1, 2 or 3");
    }
    if (length.size() != n.size()) {
      throw std::invalid_argument("grid: need one length per axis");
    }
    total = 1;
    volume = 1.0;
    for (std::size_t a = 0; a < n.size(); ++a) {
      if (n[a] < 3) {
        throw std::invalid_argument("grid: need at least 3 nodes per axis, got " +
                                    std::to_string(n[a]));
      }
      if (!(length[a] > 0.0) || !std::isfinite(length[a])) {
        throw std::invalid_argument("grid: lengths must be positive and finite");
      }
      h.push_back(length[a] / (n[a] - 1));
      total *= static_cast<std::size_t>(n[a]);
      volume *= length[a];
      dct_scale *= 2.0 * (n[a] - 1);

      std::vector<double> eig(n[a]);
      for (int k = 0; k < n[a]; ++k) {
        eig[k] = (2.0 - 2.0 * std::cos(std::numbers::pi * k / (n[a] - 1))) / (h[a] * h[a]);
      }
      eig[0] = 0.0;
      axis_eig.push_back(std::move(eig));
    }

    weights.assign(total, 1.0);
    symbol.assign(total, 0.0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (std::size_t a = 0; a < n.size(); ++a) {
        const int i = static_cast<int>(rest % n[a]);
        rest /= n[a];
        const bool edge = (i == 0 || i == n[a] - 1);
        weights[idx] *= edge ? 0.5 * h[a] : h[a];
        symbol[idx] += axis_eig[a][i];
      }
    }

    // FFTW is row-major with the last dimension fastest; our x is fastest.
    std::vector<int> dims(n.rbegin(), n.rend());
    std::vector<fftw_r2r_kind> kinds(n.size(), FFTW_REDFT00);
    std::vector<double> scratch(total);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_r2r(static_cast<int>(dims.size()), dims.data(), scratch.data(),
                         scratch.data(), kinds.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) {
      throw std::runtime_error("grid: failed to create DCT-I plan");
    }
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;
};

Grid::Grid(std::vector<int> n_per_axis, std::vector<double> length_per_axis)
    : impl_(std::make_shared<const Impl>(std::move(n_per_axis), std::move(length_per_axis))) {}

int Grid::ndim() const { return static_cast<int>(impl_->n.size()); }
std::span<const int> Grid::n_per_axis() const { return impl_->n; }
std::span<const double> Grid::lengths() const { return impl_->length; }
double Grid::spacing(int axis) const { return impl_->h.at(axis); }
std::size_t Grid::size() const { return impl_->total; }
double Grid::volume() const { return impl_->volume; }
std::span<const double> Grid::weights() const { return impl_->weights; }
std::span<const double> Grid::axis_eigenvalues(int axis) const { return impl_->axis_eig.at(axis); }
std::span<const double> Grid::symbol() const { return impl_->symbol; }

double Grid::coordinate(int axis, int i) const { return i * impl_->h.at(axis); }

int Grid::axis_index(std::size_t idx, int axis) const {
  for (int a = 0; a < axis; ++a) idx /= impl_->n[a];
  return static_cast<int>(idx % impl_->n[axis]);
}

void Grid::apply_multiplier(std::span<const double> in, std::span<const double> multiplier,
                            std::span<double> out) const {
  const std::size_t total = impl_->total;
  if (in.size() != total || out.size() != total || multiplier.size() != total) {
    throw std::invalid_argument("grid: size mismatch in spectral multiply");
  }
  std::vector<double> work(in.begin(), in.end());
  fftw_execute_r2r(impl_->plan, work.data(), work.data());
  const double scale = 1.0 / impl_->dct_scale;
  for (std::size_t k = 0; k < total; ++k) work[k] *= multiplier[k] * scale;
  fftw_execute_r2r(impl_->plan, work.data(), work.data());
  std::copy(work.begin(), work.end(), out.begin());
}

bool Grid::same_shape(const Grid& other) const {
  if (impl_ == other.impl_) return true;
  return impl_->n == other.impl_->n && impl_->length == other.impl_->length;
}

}  // namespace chlab
