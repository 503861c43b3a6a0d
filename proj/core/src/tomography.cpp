#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <set>
#include <string>

#include "quadtomo/errors.hpp"
#include "quadtomo/tomography.hpp"

namespace quadtomo {

namespace {

using Complex = std::complex<double>;

constexpr double kConditionLimit = 1e12;
constexpr int kRebalanceInterval = 10;

Eigen::MatrixXcd projectPsd(const Eigen::MatrixXcd& x, double margin) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(margin);
  const Eigen::MatrixXcd& u = es.eigenvectors();
  Eigen::MatrixXcd out = u * lam.cast<Complex>().asDiagonal() * u.adjoint();
  return 0.5 * (out + out.adjoint());
}

}  // namespace

void SolverSettings::validate() const {
  if (maxIterations < 1) throw ConfigError("solver needs at least one iteration");
  if (!(primalTolerance > 0.0) || !(dualTolerance > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (!(penaltyParameter > 0.0)) throw ConfigError("ADMM penalty parameter must be positive");
  if (!(coneMargin >= 0.0)) throw ConfigError("cone margin must be non-negative");
}

double weightedResidualNorm(const DesignSystem& system, const Eigen::MatrixXd& v) {
  const Eigen::VectorXd r = system.w.asDiagonal() * (system.a * vectorize(v) - system.b);
  return r.norm();
}

ReconstructionResult solveConstrainedLeastSquares(const DesignSystem& system, const SolverSettings& settings,
                                                  const Eigen::MatrixXd* initial) {
  settings.validate();
  const int m = system.modes;
  const int p = unknownCount(m);
  if (system.rowCount() == 0 || system.a.cols() != p) throw DimensionError("design system is empty or malformed");

  ReconstructionResult result;
  result.inputWindow = system.times;

  const Eigen::MatrixXd wa = system.w.asDiagonal() * system.a;
  const Eigen::VectorXd wb = system.w.asDiagonal() * system.b;
  Eigen::MatrixXd normal = wa.transpose() * wa;
  Eigen::VectorXd rhs = wa.transpose() * wb;
  const double scale = normal.trace() / p;
  if (!(scale > 0.0)) throw DimensionError("design matrix has no information");
  normal /= scale;
  rhs /= scale;

  // Rank check on the scaled normal matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spectrum(normal);
  const Eigen::VectorXd& lam = spectrum.eigenvalues();
  const double top = lam.maxCoeff();
  const double condition = lam.minCoeff() > 0.0 ? top / lam.minCoeff() : std::numeric_limits<double>::infinity();
  if (condition > kConditionLimit) {
    result.rankDeficient = true;
    std::set<int> unknowns, modes;
    for (int q = 0; q < p; ++q) {
      if (lam(q) * kConditionLimit > top) break;
      const Eigen::VectorXd vec = spectrum.eigenvectors().col(q);
      for (int r = 0; r < p; ++r) {
        if (std::abs(vec(r)) > 0.1) {
          unknowns.insert(r);
          const auto [j, k] = unknownModes(r, m);
          modes.insert(j);
          modes.insert(k);
        }
      }
    }
    result.suppressedUnknowns.assign(unknowns.begin(), unknowns.end());
    result.suppressedModes.assign(modes.begin(), modes.end());
    std::string names;
    for (int r : result.suppressedUnknowns) {
      if (!names.empty()) names += ", ";
      names += unknownLabel(r, m);
    }
    std::string modeNames;
    for (int k : result.suppressedModes) {
      if (!modeNames.empty()) modeNames += ", ";
      modeNames += std::to_string(k + 1);
    }
    result.diagnostics.warn("normal matrix is ill-conditioned (condition estimate " + std::to_string(condition) +
                            "); data do not determine " + names + " (modes " + modeNames + ")");
  }

  const Eigen::VectorXd d = frobeniusWeights(m);
  const Eigen::MatrixXcd halfOmega = Complex(0.0, 0.5) * symplecticForm(m).cast<Complex>();
  const double margin = settings.coneMargin;

  auto finish = [&](const Eigen::VectorXd& v, bool converged) {
    ConeProjectionSettings cone;
    cone.margin = margin;
    result.v = projectHeisenbergCone(devectorize(v, m), cone);
    result.feasibilityMargin = result.v.feasibilityMargin();
    result.theta = weightedResidualNorm(system, result.v.matrix());
    result.converged = converged;
    return result;
  };

  // Warm start: ridge-regularized unconstrained minimizer. At full rank this is the exact
  // weighted least-squares solution; when it is already feasible the constraint is inactive.
  Eigen::VectorXd v;
  {
    Eigen::MatrixXd ridge = normal;
    if (result.rankDeficient) ridge.diagonal().array() += 1e-12 * top;
    Eigen::LLT<Eigen::MatrixXd> llt(ridge);
    if (llt.info() != Eigen::Success) {
      ridge.diagonal().array() += 1e-10 * top;
      llt.compute(ridge);
    }
    v = llt.solve(rhs);
  }
  if (initial != nullptr) {
    if (initial->rows() != 2 * m || initial->cols() != 2 * m) throw DimensionError("initial covariance has wrong size");
    v = vectorize(0.5 * (*initial + initial->transpose()));
  } else if (!result.rankDeficient && heisenbergMargin(devectorize(v, m)) >= margin) {
    return finish(v, true);
  }

  double rho = settings.penaltyParameter;
  Eigen::LLT<Eigen::MatrixXd> factor;
  auto refactor = [&]() {
    Eigen::MatrixXd k = normal;
    k.diagonal() += rho * d;
    factor.compute(k);
    if (factor.info() != Eigen::Success) throw NumericalError("ADMM system factorization failed", rho);
  };
  refactor();

  Eigen::MatrixXcd z = projectPsd(devectorize(v, m).cast<Complex>() + halfOmega, margin);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * m, 2 * m);

  for (int it = 1; it <= settings.maxIterations; ++it) {
    const Eigen::MatrixXd target = (z - u).real();
    v = factor.solve(rhs + rho * d.cwiseProduct(vectorize(0.5 * (target + target.transpose()))));
    const Eigen::MatrixXcd x = devectorize(v, m).cast<Complex>() + halfOmega;
    const Eigen::MatrixXcd zPrev = z;
    const Eigen::MatrixXcd uPrev = u;
    z = projectPsd(x + u, margin);
    u += x - z;

    const double primal = (x - z).norm();
    const double dual = rho * (z - zPrev).norm();
    result.primalHistory.push_back(primal);
    result.dualHistory.push_back(dual);
    result.meritHistory.push_back(rho * (z - zPrev).squaredNorm() + rho * (u - uPrev).squaredNorm());
    result.iterations = it;

    const double epsPrimal = settings.primalTolerance * std::max({1.0, x.norm(), z.norm()});
    const double epsDual = settings.dualTolerance * std::max(1.0, rho * u.norm());
    if (primal <= epsPrimal && dual <= epsDual) return finish(v, true);

    if (it % kRebalanceInterval == 0) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
        refactor();
        result.penaltyChanges.push_back(it);
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
        refactor();
        result.penaltyChanges.push_back(it);
      }
    }
  }
  result.diagnostics.warn("ADMM stopped after " + std::to_string(settings.maxIterations) +
                          " iterations without meeting the tolerances");
  return finish(v, false);
}

ResidualSummary residualDiagnostics(const ReconstructionResult& result, const DesignSystem& system) {
  if (result.v.modeCount() != system.modes) throw DimensionError("result and design system disagree on modes");
  ResidualSummary s;
  const Eigen::VectorXd predicted = system.a * vectorize(result.v.matrix());
  s.residuals = ((system.b - predicted).cwiseAbs().array() * system.w.array()).matrix();
  std::vector<double> sorted(s.residuals.data(), s.residuals.data() + s.residuals.size());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  };
  s.median = quantile(0.5);
  s.q90 = quantile(0.9);
  s.max = sorted.empty() ? 0.0 : sorted.back();
  return s;
}

}  // namespace quadtomo
