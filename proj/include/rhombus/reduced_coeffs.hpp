#pragma once

#include <Eigen/Dense>

#include "rhombus/central_config.hpp"

namespace rhombus {

/// Orbital eccentricity, 0 <= e < 1.
class Eccentricity {
 public:
  explicit Eccentricity(double e);
  double value() const noexcept { return e_; }

 private:
  double e_;
};

struct PhiPair {
  double phi1;
  double phi2;
};

struct PsiPair {
  double psi1;
  double psi2;
};

/// Diagonal entries of K_{u,e}(t) at e = 0. The endpoints return the limit
/// values {3/4, 9/4} in the appropriate order.
PhiPair phi(ShapeParam u);

/// Diagonal entries of T_{u,e}(t) at e = 0; psi1 + psi2 = 3 identically.
PsiPair psi(ShapeParam u);

struct CoefficientDerivatives {
  double phi_diff;   ///< d(phi2 - phi1)/du
  double psi_diff;   ///< d(psi1 - psi2)/du
  double phi_prod;   ///< d(phi1 phi2)/du
  double psi_prod;   ///< d(psi1 psi2)/du
  double phi_trace;  ///< d(4 - phi1 - phi2)/du
};

/// Analytic u-derivatives (forward-mode differentiation through m, alpha
/// and mu). At u = 1/sqrt(3) the mirror relation u -> 1/u is used.
CoefficientDerivatives coefficient_derivatives(ShapeParam u);

struct ReducedCoefficients {
  double u;
  double phi1, phi2, psi1, psi2;
  double dphi_diff;  ///< d(phi2 - phi1)/du
  double dpsi_diff;  ///< d(psi1 - psi2)/du
};

ReducedCoefficients reduced_coefficients(ShapeParam u);

struct CoefficientMatrices {
  Eigen::Matrix2d K;
  Eigen::Matrix2d T;
};

/// K = diag(phi1, phi2)/(1 + e cos t), T = diag(psi1, psi2)/(1 + e cos t).
CoefficientMatrices coefficient_matrices(ShapeParam u, Eccentricity e,
                                         double t);

enum class RotatedBlock { A, B };

/// Planar rotation [[cos t, -sin t], [sin t, cos t]].
Eigen::Matrix2d rotation(double t);

/// S(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]].
Eigen::Matrix2d reflection(double t);

/// R(t) K R(t)^T (block A) or R(t) T R(t)^T (block B).
Eigen::Matrix2d rotated_form(ShapeParam u, Eccentricity e, double t,
                             RotatedBlock which);

/// [(c1 + c2) I + (c1 - c2) S(t)] / (2 (1 + e cos t)) with (c1, c2) the phi
/// or psi pair. Equal to rotated_form up to rounding.
Eigen::Matrix2d rotated_closed_form(ShapeParam u, Eccentricity e, double t,
                                    RotatedBlock which);

struct CriticalParams {
  double u1;      ///< root of d(phi2 - phi1)/du in (1/sqrt(3), 1)
  double u2;      ///< root of d(phi2 - phi1)/du in (1, sqrt(3))
  double u3;      ///< root of psi1 - psi2 in (1/sqrt(3), 1)
  double u3_bar;  ///< stationary point of psi1 psi2 in (1/sqrt(3), 1)
  double beta1;   ///< 9 - (phi1(u1) - phi2(u1))^2
  double phi_diff_u1;
  double phi_sum_u1;
  double psi_prod_u3;
  double max_residual;
  /// Positivity thresholds in e for A(27/4, e) and A(beta1, e); consumed
  /// as published constants, not computed here.
  double e_star_27_4 = 0.4454;
  double e_star_beta1 = 0.4435;
};

/// Locates u1, u2, u3 and the stationary point of psi1 psi2 by bracketed
/// TOMS 748 iteration. Requires tol >= 1e-12; the residual |f(root)| of
/// every root must fall below tol.
CriticalParams find_critical_params(double tol = 1e-12);

}  // namespace rhombus
