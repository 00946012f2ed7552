#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rhombus/central_config.hpp"
#include "rhombus/reduced_coeffs.hpp"

namespace rhombus {

enum class OperatorKind {
  ScriptA,     ///< -d^2/dt^2 - 1 + [(phi1+phi2) I + (phi1-phi2) S] / (2(1+e cos t))
  ScriptB,     ///< same with psi
  ABeta,       ///< -d^2/dt^2 - 1 + [3 I + sqrt(9-beta) S] / (2(1+e cos t))
  ScriptABar,  ///< script-A(1,e)/|phi1-phi2| + sign(phi1-phi2) S / (2(1+e cos t))
};

std::string_view to_string(OperatorKind kind);
/// Accepts "scriptA", "scriptB", "Abeta", "scriptAbar"; throws Config otherwise.
OperatorKind parse_operator(std::string_view name);

/// Second-order operator in the normal form
///   diff_scale (-d^2/dt^2 - 1) + [a I + b S(t)] / (2 (1 + e cos t))
/// acting on C^2-valued functions with y(2pi) = omega y(0).
struct OperatorSpec {
  OperatorKind kind;
  double param;  ///< u for the script operators, beta for ABeta
  double e;
  double diff_scale;
  double a;
  double b;

  static OperatorSpec script_a(ShapeParam u, Eccentricity e);
  static OperatorSpec script_b(ShapeParam u, Eccentricity e);
  /// Requires 0 <= beta <= 9.
  static OperatorSpec a_beta(double beta, Eccentricity e);
  /// Normalised form used for monotonicity in u; requires u != 1.
  static OperatorSpec script_a_bar(ShapeParam u, Eccentricity e);
};

/// Fourier coefficients c_k, |k| <= kmax, of 1/(1 + e cos t), computed by an
/// FFT of equispaced samples. The sample count is chosen so the aliasing
/// error r^(L-k) stays below 1e-17. Returned as c_0..c_kmax (c_{-k} = c_k).
std::vector<double> kernel_fourier_coefficients(Eccentricity e, int kmax);

/// (sqrt(1-e^2) - 1)/e, the geometric decay ratio of c_k (0 at e = 0).
double kernel_decay_ratio(double e);

struct GalerkinMatrix {
  Eigen::MatrixXcd H;  ///< size 2(2N+1)
  int N;
  double rho;
  /// |c_N| / c_0, a bound on the neglected coupling past the window.
  double tail_estimate;
  bool truncated;  ///< tail_estimate above kTailTolerance
};

inline constexpr double kTailTolerance = 1e-8;

/// Galerkin matrix in the basis e^{i(k+rho)t} (x) {e1, e2}, k = -N..N,
/// ordered (k, component). Requires N >= 8 and rho in [0, 1).
GalerkinMatrix assemble(const OperatorSpec& spec, double rho, int N);

/// max |H - H^*| over entries.
double hermitian_residual(const Eigen::MatrixXcd& H);

/// N = 64 for e <= 0.8, scaled by 0.2/(1-e) above (capped at 512).
int default_truncation(double e);

struct IndexResult {
  std::complex<double> omega;
  double rho;
  int morse_index;
  int nullity;
  double min_eigenvalue;
  int truncation;
  bool converged;
};

/// Counts negative and near-zero eigenvalues (|lambda| <= zero_tol * max
/// |lambda|) at N and 2N. If the counts differ they are recomputed at 4N;
/// agreement between 2N and 4N is accepted, otherwise NonConvergence.
IndexResult morse_index(const OperatorSpec& spec, double rho, int N = 64,
                        double zero_tol = 1e-8);

/// Smallest Galerkin eigenvalue without the refinement check.
double min_eigenvalue(const OperatorSpec& spec, double rho, int N);

struct PositivityEntry {
  double e;
  double rho;
  double min_eigenvalue;
  bool positive;
};

using OperatorFamily = std::function<OperatorSpec(Eccentricity)>;

/// Smallest eigenvalue over an (e, rho) grid; non-positive entries are
/// flagged, not thrown.
std::vector<PositivityEntry> positivity_scan(const OperatorFamily& family,
                                             std::span<const double> e_grid,
                                             std::span<const double> rho_grid,
                                             int N);

}  // namespace rhombus
