#include "tpi/grid.hpp"

#include <cmath>
#include <sstream>

namespace tpi {

FrequencyGrid::FrequencyGrid(double k_min, double k_max, std::size_t n_points)
    : k_min_(k_min), k_max_(k_max), n_(n_points) {
  if (!(k_min > 0.0)) fail(ErrorKind::Validation, "frequency grid requires k_min > 0");
  if (!(k_max > k_min)) fail(ErrorKind::Validation, "frequency grid requires k_max > k_min");
  if (n_points < 16) fail(ErrorKind::Validation, "frequency grid requires n_points >= 16");
  if (!std::isfinite(k_min) || !std::isfinite(k_max))
    fail(ErrorKind::Validation, "frequency grid bounds must be finite");
  spacing_ = (k_max - k_min) / static_cast<double>(n_points - 1);
}

bool FrequencyGrid::operator==(const FrequencyGrid& other) const {
  return k_min_ == other.k_min_ && k_max_ == other.k_max_ && n_ == other.n_;
}

void FrequencyGrid::require_same(const FrequencyGrid& other) const {
  if (*this == other) return;
  std::ostringstream msg;
  msg << "frequency grid mismatch: [" << k_min_ << ", " << k_max_ << "] x " << n_
      << " vs [" << other.k_min_ << ", " << other.k_max_ << "] x " << other.n_;
  fail(ErrorKind::GridMismatch, msg.str());
}

}  // namespace tpi
