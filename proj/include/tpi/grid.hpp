#pragma once

#include <cstddef>

#include "tpi/errors.hpp"

namespace tpi {

/// Uniform wavenumber grid on [k_min, k_max] with trapezoidal quadrature
/// weights. Units take c = 1, so the angular frequency of node k is k itself
/// and times and inverse wavenumbers share one unit.
class FrequencyGrid {
 public:
  FrequencyGrid(double k_min, double k_max, std::size_t n_points);

  double k_min() const { return k_min_; }
  double k_max() const { return k_max_; }
  double span() const { return k_max_ - k_min_; }
  std::size_t size() const { return n_; }
  double spacing() const { return spacing_; }

  double node(std::size_t i) const { return k_min_ + spacing_ * static_cast<double>(i); }

  /// Trapezoidal weight; the weights sum to exactly (k_max - k_min).
  double weight(std::size_t i) const {
    return (i == 0 || i + 1 == n_) ? 0.5 * spacing_ : spacing_;
  }

  bool operator==(const FrequencyGrid& other) const;

  /// Throws ErrorKind::GridMismatch unless both grids are identical.
  void require_same(const FrequencyGrid& other) const;

 private:
  double k_min_;
  double k_max_;
  double spacing_;
  std::size_t n_;
};

}  // namespace tpi
