#pragma once

#include <compare>
#include <string>

namespace tpi {

enum class Polarization { H, V, Plus45, Minus45, Scalar };

const char* to_string(Polarization p);

/// A single optical mode: a propagation port plus a polarization label.
/// Labels are totally ordered so states can keep a canonical mode list.
struct ModeLabel {
  std::string port;
  Polarization polarization = Polarization::Scalar;

  auto operator<=>(const ModeLabel&) const = default;
};

std::string to_string(const ModeLabel& m);

inline ModeLabel mode(std::string port, Polarization pol = Polarization::Scalar) {
  return ModeLabel{std::move(port), pol};
}

/// Exchange statistics sign: +1 bosons, -1 fermions.
struct ExchangeStatistics {
  int sign = +1;

  static ExchangeStatistics boson() { return {+1}; }
  static ExchangeStatistics fermion() { return {-1}; }

  bool operator==(const ExchangeStatistics&) const = default;
};

}  // namespace tpi
