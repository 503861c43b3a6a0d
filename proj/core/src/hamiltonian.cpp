#include <cmath>

#include "quadtomo/core_model.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/units.hpp"

namespace quadtomo {

PhysicalParams PhysicalParams::defaults() {
  PhysicalParams p;
  p.radialTrapFreq = units::hzToRadPerMs(1400.0);
  p.longitudinalTrapFreq = units::hzToRadPerMs(7.0);
  p.atomNumber = 3147.5;
  p.boxHalfLengthUm = 24.5;
  return p;
}

void PhysicalParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
  };
  positive(atomMassU, "atom mass");
  positive(scatteringLengthUm, "scattering length");
  positive(radialTrapFreq, "radial trap frequency");
  positive(longitudinalTrapFreq, "longitudinal trap frequency");
  positive(atomNumber, "atom number");
  positive(boxHalfLengthUm, "box half length");
}

double PhysicalParams::hbarOverMass() const { return units::hbarOverMass(atomMassU); }

Eigen::VectorXd GpProfile::makeGrid(double halfLength, int n) {
  if (n < 2) throw ConfigError("grid needs at least two points");
  if (!(halfLength > 0.0)) throw ConfigError("half length must be positive");
  const double dz = 2.0 * halfLength / n;
  Eigen::VectorXd z(n);
  for (int l = 0; l < n; ++l) z(l) = -halfLength + (l + 0.5) * dz;
  return z;
}

GpProfile GpProfile::homogeneous(double halfLength, int n, double totalAtoms) {
  GpProfile p;
  p.gridPoints = makeGrid(halfLength, n);
  p.density = Eigen::VectorXd::Constant(n, totalAtoms / (2.0 * halfLength));
  p.halfLength = halfLength;
  p.totalAtoms = totalAtoms;
  return p;
}

void GpProfile::validate() const {
  if (gridPoints.size() != density.size()) throw DimensionError("profile grid and density sizes differ");
  if (size() < 2) throw ConfigError("profile needs at least two grid points");
  const double dz = deltaZ();
  for (int l = 0; l < size(); ++l) {
    const double expected = -halfLength + (l + 0.5) * dz;
    if (std::abs(gridPoints(l) - expected) > 1e-9 * (1.0 + halfLength)) {
      throw ConfigError("profile grid is not the uniform cell-centred grid on [-R, R]");
    }
    if (!(density(l) >= 0.0)) throw ConfigError("profile density must be non-negative");
  }
  if (std::abs(integratedAtoms() - totalAtoms) > 1e-3 * totalAtoms) {
    throw ConfigError("profile density does not integrate to the total atom number");
  }
}

double localChemicalPotential(double density, const PhysicalParams& params) {
  const double an = params.scatteringLengthUm * density;
  return params.radialTrapFreq * ((1.0 + 3.0 * an) / std::sqrt(1.0 + 2.0 * an) - 1.0);
}

double interactionStrengthAt(double density, const PhysicalParams& params) {
  const double a = params.scatteringLengthUm;
  const double an = a * density;
  return params.radialTrapFreq * a * (2.0 + 3.0 * an) / std::pow(1.0 + 2.0 * an, 1.5);
}

Eigen::VectorXd interactionStrength(const GpProfile& profile, const PhysicalParams& params) {
  params.validate();
  if (profile.gridPoints.size() != profile.density.size()) {
    throw ConfigError("profile grid and density have different sizes");
  }
  if (std::abs(profile.halfLength - params.boxHalfLengthUm) > 1e-9 * params.boxHalfLengthUm) {
    throw ConfigError("profile half length does not match the configured box half length");
  }
  Eigen::VectorXd g(profile.size());
  for (int l = 0; l < profile.size(); ++l) {
    if (!(profile.density(l) >= 0.0)) throw ConfigError("profile density must be non-negative");
    g(l) = interactionStrengthAt(profile.density(l), params);
  }
  return g;
}

QuadraticHamiltonian discretizeHamiltonian(const GpProfile& profile, const PhysicalParams& params,
                                           double tunnelCoupling, bool includeDensityGradient) {
  if (tunnelCoupling < 0.0) throw ConfigError("tunnel coupling must be non-negative");
  const int n = profile.size();
  int occupied = 0;
  for (int l = 0; l < n; ++l) occupied += profile.density(l) > 0.0 ? 1 : 0;
  if (occupied < 2) throw ConfigError("profile needs at least two grid points with nonzero density");

  const Eigen::VectorXd g = interactionStrength(profile, params);
  const double dz = profile.deltaZ();
  const double hbarOverM = params.hbarOverMass();
  const double kinetic = hbarOverM / (2.0 * dz);

  QuadraticHamiltonian ham;
  ham.deltaZ = dz;
  ham.tunnelCoupling = tunnelCoupling;
  ham.includesDensityGradient = includeDensityGradient;
  ham.hPhi = Eigen::MatrixXd::Zero(n, n);
  ham.hRho = Eigen::MatrixXd::Zero(n, n);

  for (int l = 0; l + 1 < n; ++l) {
    const double nl = profile.density(l);
    const double nr = profile.density(l + 1);
    const double eta = std::max(std::sqrt(nl * nr), kLinkDensityFloor);

    const double wPhi = kinetic * eta;
    ham.hPhi(l, l) += wPhi;
    ham.hPhi(l + 1, l + 1) += wPhi;
    ham.hPhi(l, l + 1) -= wPhi;
    ham.hPhi(l + 1, l) -= wPhi;

    if (includeDensityGradient) {
      if (nl <= 0.0 || nr <= 0.0) {
        throw SingularityError("zero density at link " + std::to_string(l) +
                               " makes the density-gradient term singular");
      }
      const double wRho = kinetic / eta;
      ham.hRho(l, l) += wRho;
      ham.hRho(l + 1, l + 1) += wRho;
      ham.hRho(l, l + 1) -= wRho;
      ham.hRho(l + 1, l) -= wRho;
    }
  }
  for (int l = 0; l < n; ++l) {
    ham.hRho(l, l) += 2.0 * dz * g(l);
    if (tunnelCoupling > 0.0) ham.hPhi(l, l) += 2.0 * tunnelCoupling * profile.density(l) * dz;
  }
  return ham;
}

}  // namespace quadtomo
