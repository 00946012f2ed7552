#pragma once

#include <array>
#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rhombus/central_config.hpp"
#include "rhombus/reduced_coeffs.hpp"

namespace rhombus {

inline constexpr double kTwoPi = 6.283185307179586;

enum class BlockKind { Kepler, Xi, Eta, Full };

std::string_view to_string(BlockKind kind);
/// Accepts "kepler", "xi", "eta", "full"; throws ErrorCode::Config otherwise.
BlockKind parse_block(std::string_view name);

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// Linearised Hamiltonian system gamma' = J B(theta) gamma in the true
/// anomaly theta. Coordinates are ordered (momenta | positions): the 4x4
/// blocks use (W, w) and the full system uses (Z, W3, W4, z, w3, w4), so
/// the full matrix is the symplectic sum kepler <> xi <> eta.
class LinearSystem {
 public:
  LinearSystem(BlockKind kind, ShapeParam u, Eccentricity e);

  BlockKind kind() const noexcept { return kind_; }
  ShapeParam u() const noexcept { return u_; }
  double e() const noexcept { return e_; }
  /// Size 2n of the symplectic matrices: 4, or 12 for the full system.
  int dimension() const noexcept { return kind_ == BlockKind::Full ? 12 : 4; }

  /// Symmetric, 2pi-periodic coefficient matrix B(theta).
  Eigen::MatrixXd matrix(double theta) const;
  MatrixXld matrix_extended(long double theta) const;

 private:
  template <class T>
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> assemble(T theta) const;

  BlockKind kind_;
  ShapeParam u_;
  double e_;
  PhiPair phi_;
  PsiPair psi_;
};

/// Standard symplectic matrix [[0, -I_n], [I_n, 0]] of size dim.
Eigen::MatrixXd symplectic_form(int dim);

enum class Classification { Hyperbolic, Elliptic, Mixed, Degenerate };

std::string_view to_string(Classification c);
Classification parse_classification(std::string_view name);

struct ClassifyResult {
  Classification classification;
  int hyperbolic_pairs;
};

/// Hyperbolic iff every eigenvalue satisfies ||lambda| - 1| > circle_tol,
/// elliptic iff none does, mixed otherwise. The verdict is repeated at
/// circle_tol / 2 and reported as degenerate if it changes. Each pair
/// {lambda, 1/lambda} off the circle counts once.
/// Requires circle_tol in [1e-10, 1e-2].
ClassifyResult classify(std::span<const std::complex<double>> eigenvalues,
                        double circle_tol = 1e-6);

struct IntegrationOptions {
  double rtol = 1e-16;
  double atol = 1e-16;
  double theta_end = kTwoPi;
  double residual_budget = 1e-9;
  int checkpoints = 16;
  double circle_tol = 1e-6;
};

struct MonodromyResult {
  BlockKind kind;
  double u;
  double e;
  Eigen::MatrixXd M;
  /// Sorted by modulus, then imaginary part.
  std::vector<std::complex<double>> eigenvalues;
  /// Eigenvalues of the xi/eta part only (equal to `eigenvalues` except for
  /// the full system, where the Kepler block is dropped).
  std::vector<std::complex<double>> essential_eigenvalues;
  /// Frobenius norm of M^T J M - J at theta_end.
  double symplectic_residual;
  /// Largest residual over the checkpoints along the path.
  double checkpoint_residual;
  double determinant;
  Classification classification;
  int hyperbolic_pairs;
  std::size_t steps;
};

/// Integrates gamma' = J B(theta) gamma, gamma(0) = I over [0, theta_end]
/// with an adaptive Runge-Kutta-Fehlberg 7(8) pair in extended precision.
/// Requires e <= 0.99 and rtol, atol >= 1e-19. Throws ToleranceNotMet when
/// the residual exceeds 10x the budget and StepFailure if the step size
/// control breaks down.
MonodromyResult fundamental_solution(const LinearSystem& sys,
                                     const IntegrationOptions& opts = {});

ClassifyResult classify(const MonodromyResult& result, double circle_tol);

struct AutonomousSpectrum {
  double p2_trace;  ///< 4 - phi1 - phi2
  double p2_det;    ///< phi1 phi2
  double p3_trace;  ///< 4 - psi1 - psi2
  double p3_det;    ///< psi1 psi2
  std::array<std::complex<double>, 4> p2_roots;
  std::array<std::complex<double>, 4> p3_roots;
};

/// Roots of lambda^4 + b lambda^2 + c for the xi (p2) and eta (p3) blocks
/// at e = 0, solved as a quadratic in lambda^2.
AutonomousSpectrum autonomous_spectrum(ShapeParam u);

/// Largest relative distance between an eigenvalue and the nearest member
/// of {1/lambda, conj(lambda)} in the same list.
double spectral_symmetry_defect(std::span<const std::complex<double>> eigs);

/// Greedy one-to-one matching distance between two eigenvalue lists,
/// relative to max(1, |lambda|).
double spectrum_mismatch(std::span<const std::complex<double>> a,
                         std::span<const std::complex<double>> b);

/// dim ker(M - omega I), counting singular values below
/// tol * max(1, sigma_max).
int kernel_dimension(const Eigen::MatrixXd& M, std::complex<double> omega,
                     double tol = 1e-6);

struct SymmetryReport {
  double u;
  double e;
  /// |gamma_{1/u}(2pi) - J4^{-1} gamma_u(2pi) J4| relative to |gamma_u|
  double xi_conjugation_defect;
  /// |eta_{1/u}(2pi) - eta_u(2pi)| relative to |eta_u|
  double eta_defect;
  double xi_spectrum_mismatch;
  double eta_spectrum_mismatch;
};

SymmetryReport symmetry_check(ShapeParam u, Eccentricity e,
                              const IntegrationOptions& opts = {});

}  // namespace rhombus
