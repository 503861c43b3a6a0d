#include "quadtomo/units.hpp"

#include "quadtomo/errors.hpp"

namespace quadtomo::units {

double hbarOverMass(double massU) {
  if (!(massU > 0.0)) throw ConfigError("atom mass must be positive");
  // m^2/s -> um^2/ms is a factor 1e12 / 1e3.
  return kHbarJs / (massU * kAtomicMassUnitKg) * 1e9;
}

}  // namespace quadtomo::units
