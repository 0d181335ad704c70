#include "tpi/modes.hpp"

namespace tpi {

const char* to_string(Polarization p) {
  switch (p) {
    case Polarization::H: return "H";
    case Polarization::V: return "V";
    case Polarization::Plus45: return "+45";
    case Polarization::Minus45: return "-45";
    case Polarization::Scalar: return "scalar";
  }
  return "?";
}

std::string to_string(const ModeLabel& m) {
  if (m.polarization == Polarization::Scalar) return m.port;
  return m.port + ":" + to_string(m.polarization);
}

}  // namespace tpi
