#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "quadtomo/core_model.hpp"
#include "quadtomo/errors.hpp"

namespace quadtomo {

TrapShape harmonicTrap(const PhysicalParams& params) {
  const double w = params.longitudinalTrapFreq;
  const double hbarOverM = params.hbarOverMass();
  return [w, hbarOverM](double z) { return 0.5 * w * w * z * z / hbarOverM; };
}

TrapShape boxTrap(double wallPosition, double wallWidth, double wallHeight) {
  if (!(wallWidth > 0.0) || wallHeight < 0.0 || wallPosition < 0.0) {
    throw ConfigError("box wall needs positive width and non-negative height and position");
  }
  return [=](double z) {
    const double excess = std::abs(z) - wallPosition;
    if (excess <= 0.0) return 0.0;
    const double u = excess / wallWidth;
    return wallHeight * u * u;
  };
}

TrapShape boxPlusHarmonicTrap(const PhysicalParams& params, double wallPosition, double wallWidth,
                              double wallHeight) {
  TrapShape h = harmonicTrap(params);
  TrapShape b = boxTrap(wallPosition, wallWidth, wallHeight);
  return [h, b](double z) { return h(z) + b(z); };
}

namespace {

// Density n with mu_loc(n) = target; closed form after substituting s = sqrt(1 + 2 a n).
double densityForLocalPotential(double target, const PhysicalParams& params) {
  if (target <= 0.0) return 0.0;
  const double c = 1.0 + target / params.radialTrapFreq;
  const double s = (c + std::sqrt(c * c + 3.0)) / 3.0;
  return (s * s - 1.0) / (2.0 * params.scatteringLengthUm);
}

Eigen::VectorXd thomasFermiGuess(const Eigen::VectorXd& potential, double dz, const PhysicalParams& params) {
  const int n = static_cast<int>(potential.size());
  auto atomsAt = [&](double mu) {
    double total = 0.0;
    for (int l = 0; l < n; ++l) total += densityForLocalPotential(mu - potential(l), params);
    return total * dz;
  };
  double lo = potential.minCoeff();
  double hi = lo + 1.0;
  while (atomsAt(hi) < params.atomNumber) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (atomsAt(mid) < params.atomNumber ? lo : hi) = mid;
  }
  Eigen::VectorXd psi(n);
  for (int l = 0; l < n; ++l) psi(l) = std::sqrt(densityForLocalPotential(hi - potential(l), params));
  return psi;
}

// In-place Thomas algorithm for a symmetric tridiagonal system with constant off-diagonal.
void solveTridiagonal(const std::vector<double>& diag, double off, Eigen::VectorXd& rhs,
                      std::vector<double>& scratch) {
  const int n = static_cast<int>(diag.size());
  scratch.resize(n);
  double denom = diag[0];
  scratch[0] = off / denom;
  rhs(0) /= denom;
  for (int l = 1; l < n; ++l) {
    denom = diag[l] - off * scratch[l - 1];
    scratch[l] = off / denom;
    rhs(l) = (rhs(l) - off * rhs(l - 1)) / denom;
  }
  for (int l = n - 2; l >= 0; --l) rhs(l) -= scratch[l] * rhs(l + 1);
}

}  // namespace

GpSolution solveGpGroundState(const PhysicalParams& params, const TrapShape& trap, int gridSize,
                              const GpSolverSettings& settings) {
  params.validate();
  if (gridSize < 16) throw ConfigError("GP grid needs at least 16 points");
  if (!trap) throw ConfigError("trap shape is empty");
  if (settings.maxIterations < 1 || !(settings.tolerance > 0.0)) {
    throw ConfigError("GP solver needs a positive iteration budget and tolerance");
  }

  const double R = params.boxHalfLengthUm;
  const Eigen::VectorXd z = GpProfile::makeGrid(R, gridSize);
  const double dz = 2.0 * R / gridSize;
  const double kappa = 0.5 * params.hbarOverMass() / (dz * dz);

  Eigen::VectorXd potential(gridSize);
  for (int l = 0; l < gridSize; ++l) {
    potential(l) = trap(z(l));
    if (!std::isfinite(potential(l))) throw ConfigError("trap potential is not finite on the grid");
  }
  potential.array() -= potential.minCoeff();

  Eigen::VectorXd psi = thomasFermiGuess(potential, dz, params);
  auto normalize = [&](Eigen::VectorXd& v) { v *= std::sqrt(params.atomNumber / (v.squaredNorm() * dz)); };
  normalize(psi);

  const double energyScale =
      std::max(localChemicalPotential(psi.array().square().maxCoeff(), params), params.longitudinalTrapFreq);
  double dt = settings.timeStep > 0.0 ? settings.timeStep : 20.0 / energyScale;

  GpSolution sol;
  std::vector<double> diag(gridSize);
  std::vector<double> scratch;
  Eigen::VectorXd density = psi.array().square();
  double previousChange = std::numeric_limits<double>::infinity();
  int growing = 0;

  for (int it = 1; it <= settings.maxIterations; ++it) {
    for (int l = 0; l < gridSize; ++l) {
      const double neighbours = (l == 0 || l == gridSize - 1) ? 1.0 : 2.0;
      diag[l] = 1.0 + dt * (neighbours * kappa + potential(l) + localChemicalPotential(density(l), params));
    }
    Eigen::VectorXd next = psi;
    solveTridiagonal(diag, -dt * kappa, next, scratch);
    for (int l = 0; l < gridSize; ++l) {
      if (next(l) < 0.0) {
        next(l) = 0.0;
        ++sol.clippedAmplitudes;
      }
    }
    normalize(next);
    const Eigen::VectorXd nextDensity = next.array().square();
    const double change = (nextDensity - density).norm() / density.norm();
    psi = std::move(next);
    density = nextDensity;
    sol.iterations = it;
    sol.finalChange = change;
    if (change < settings.tolerance) break;

    // Oscillation of the lagged nonlinearity shows up as a growing change; shrink the step then.
    growing = change > previousChange ? growing + 1 : 0;
    if (growing >= 5) {
      dt *= 0.5;
      growing = 0;
    }
    previousChange = change;
  }
  if (!(sol.finalChange < settings.tolerance)) {
    throw NumericalError("GP ground state did not converge within " + std::to_string(settings.maxIterations) +
                             " iterations",
                         sol.finalChange);
  }

  // Chemical potential from the converged state, including the removed potential offset.
  const double offset = trap(z(0)) - potential(0);
  double energy = 0.0;
  for (int l = 0; l < gridSize; ++l) {
    double lap = (l > 0 ? psi(l) - psi(l - 1) : 0.0) + (l + 1 < gridSize ? psi(l) - psi(l + 1) : 0.0);
    energy += psi(l) * (kappa * lap + (potential(l) + localChemicalPotential(density(l), params)) * psi(l));
  }
  sol.chemicalPotential = energy * dz / params.atomNumber + offset;

  sol.profile.gridPoints = z;
  sol.profile.density = density;
  sol.profile.halfLength = R;
  sol.profile.totalAtoms = params.atomNumber;
  return sol;
}

}  // namespace quadtomo
