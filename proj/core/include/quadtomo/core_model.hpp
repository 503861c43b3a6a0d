#pragma once

#include <functional>

#include <Eigen/Dense>

namespace quadtomo {

// Experimental parameters of a single 1D gas. Frequencies are angular (rad/ms),
// lengths in um. The scattering length is a configuration input; the default
// is the Rb-87 value.
struct PhysicalParams {
  double atomMassU = 86.909180527;
  double scatteringLengthUm = 5.24e-3;
  double radialTrapFreq = 0.0;        // omega_perp
  double longitudinalTrapFreq = 0.0;  // omega_l
  double atomNumber = 0.0;            // atoms per gas
  double boxHalfLengthUm = 0.0;       // R_1D

  // Scan-1 geometry: L = 49 um, 3147.5 atoms per well, omega_perp = 2pi x 1.4 kHz,
  // omega_l = 2pi x 7 Hz.
  static PhysicalParams defaults();

  void validate() const;
  double hbarOverMass() const;  // um^2/ms
};

// Mean density on the cell-centred grid z_l = -R + (l + 1/2) dz, dz = 2R/N.
struct GpProfile {
  Eigen::VectorXd gridPoints;
  Eigen::VectorXd density;  // atoms/um
  double halfLength = 0.0;
  double totalAtoms = 0.0;

  int size() const { return static_cast<int>(gridPoints.size()); }
  double deltaZ() const { return 2.0 * halfLength / size(); }
  double integratedAtoms() const { return density.sum() * deltaZ(); }

  // Checks the grid layout, non-negativity and normalisation (0.1%).
  void validate() const;

  static Eigen::VectorXd makeGrid(double halfLength, int n);
  static GpProfile homogeneous(double halfLength, int n, double totalAtoms);
};

// External longitudinal potential in rad/ms as a function of z (um).
using TrapShape = std::function<double(double)>;

TrapShape harmonicTrap(const PhysicalParams& params);

// Flat-bottomed box with quadratic walls: zero for |z| < wallPosition and
// wallHeight * ((|z| - wallPosition) / wallWidth)^2 beyond.
TrapShape boxTrap(double wallPosition, double wallWidth, double wallHeight);

TrapShape boxPlusHarmonicTrap(const PhysicalParams& params, double wallPosition, double wallWidth,
                              double wallHeight);

// Local chemical potential of the transversely broadened gas,
// mu(n) = hbar w_perp [(1 + 3 a n) / sqrt(1 + 2 a n) - 1]; its derivative is g[n].
double localChemicalPotential(double density, const PhysicalParams& params);

// g(n) = hbar w_perp a (2 + 3 a n) / (1 + 2 a n)^{3/2}, rad/ms * um.
double interactionStrengthAt(double density, const PhysicalParams& params);

Eigen::VectorXd interactionStrength(const GpProfile& profile, const PhysicalParams& params);

struct GpSolverSettings {
  int maxIterations = 400000;
  double tolerance = 1e-8;   // relative L2 change of the density between iterates
  double timeStep = 0.0;     // imaginary-time step in ms; 0 picks one from the energy scale
};

struct GpSolution {
  GpProfile profile;
  double chemicalPotential = 0.0;  // rad/ms
  int iterations = 0;
  double finalChange = 0.0;
  int clippedAmplitudes = 0;  // negative amplitudes clipped during iteration
};

// Ground state of the 1D Gross-Pitaevskii problem with the transverse-broadened
// nonlinearity on the grid [-R_1D, R_1D] (zero-flux ends). Throws NumericalError
// when the iteration budget runs out.
GpSolution solveGpGroundState(const PhysicalParams& params, const TrapShape& trap, int gridSize,
                              const GpSolverSettings& settings = {});

// Block-diagonal couplings of H_N = 1/2 Q^T (H_phi + H_rho) Q, energies in rad/ms.
struct QuadraticHamiltonian {
  Eigen::MatrixXd hPhi;
  Eigen::MatrixXd hRho;
  double deltaZ = 0.0;
  double tunnelCoupling = 0.0;  // J, rad/ms
  bool includesDensityGradient = true;

  int size() const { return static_cast<int>(hPhi.rows()); }
};

// Floor applied to link densities before they are inverted.
inline constexpr double kLinkDensityFloor = 1e-9;

QuadraticHamiltonian discretizeHamiltonian(const GpProfile& profile, const PhysicalParams& params,
                                           double tunnelCoupling, bool includeDensityGradient = true);

}  // namespace quadtomo
