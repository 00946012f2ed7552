#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

namespace rhombus {

inline const double kSqrt3 = 1.7320508075688772;
inline const double kInvSqrt3 = 0.57735026918962576;

/// Rhombus half-diagonal ratio u, restricted to the admissible interval
/// [1/sqrt(3), sqrt(3)]. Throws ErrorCode::Domain otherwise.
class ShapeParam {
 public:
  explicit ShapeParam(double u);

  double value() const noexcept { return u_; }
  double inverse() const noexcept { return 1.0 / u_; }
  bool is_lower_endpoint() const noexcept { return u_ == kInvSqrt3; }
  bool is_upper_endpoint() const noexcept { return u_ == kSqrt3; }
  bool is_endpoint() const noexcept {
    return is_lower_endpoint() || is_upper_endpoint();
  }

  /// Mirror image 1/u. The endpoints map onto each other exactly.
  ShapeParam mirrored() const;

 private:
  double u_;
};

/// Mass m of bodies 1 and 3 (bodies 2 and 4 carry unit mass).
/// m(sqrt(3)) = 0. At u = 1/sqrt(3) the ratio has a pole and +infinity is
/// returned; m(1/u) = 1/m(u) holds on the open interval.
double mass_ratio(ShapeParam u);

struct CentralConfiguration {
  ShapeParam u;
  double m;
  double alpha;
  double mu_potential;
  std::array<Eigen::Vector2d, 4> positions;

  std::array<double, 4> masses() const { return {m, 1.0, m, 1.0}; }
};

/// Normalised rhombus configuration a_1..a_4 with sum m_i a_i = 0 and
/// sum m_i |a_i|^2 = 1. Throws SingularConfiguration at u = 1/sqrt(3),
/// where the mass ratio diverges.
CentralConfiguration build_configuration(ShapeParam u);

/// Newtonian potential U(q) = sum_{i<j} m_i m_j / |q_i - q_j| for planar
/// positions stacked as (x1, y1, ..., x4, y4).
double potential(const Eigen::Matrix<double, 8, 1>& q,
                 const std::array<double, 4>& masses);

Eigen::Matrix<double, 8, 1> potential_gradient(
    const Eigen::Matrix<double, 8, 1>& q, const std::array<double, 4>& masses);

Eigen::Matrix<double, 8, 1> stacked_positions(const CentralConfiguration& c);

/// max_i |dU/dq_i + mu m_i a_i|; zero for an exact central configuration.
double configuration_residual(const CentralConfiguration& c);

struct PotentialHessian {
  std::array<std::array<Eigen::Matrix2d, 4>, 4> blocks;

  const Eigen::Matrix2d& operator()(int i, int j) const {
    return blocks[i][j];
  }
  Eigen::Matrix<double, 8, 8> dense() const;
  /// max_i |B_ii + sum_{j != i} B_ij|
  double row_sum_defect() const;
};

/// Closed-form Hessian blocks d^2U/dq_i dq_j at the rhombus configuration.
PotentialHessian hessian_blocks(ShapeParam u);

/// Column pairs of the reduction matrix: centre of mass g, Kepler
/// coordinate z, and the two internal coordinates w3, w4.
enum class ReducedCoordinate { G = 0, Z = 1, W3 = 2, W4 = 3 };

struct ReductionMatrix {
  Eigen::Matrix<double, 8, 8> A;
  /// diag(m I, I, m I, I)
  Eigen::Matrix<double, 8, 8> mass_matrix;

  Eigen::Matrix<double, 8, 2> columns(ReducedCoordinate which) const {
    return A.middleCols<2>(2 * static_cast<int>(which));
  }
  /// |A^T M A - I|_max
  double orthonormality_defect() const;
  /// |J~ A - A J~|_max with J~ = diag(J2, J2, J2, J2)
  double commutation_defect() const;
};

/// Reduction matrix Q = A X. The centre-of-mass column pair is scaled by
/// 1/sqrt(2m + 2) so that A^T M A = I. Throws SingularConfiguration at
/// either endpoint, where m = 0 or m = infinity.
ReductionMatrix reduction_matrix(ShapeParam u);

/// sigma^3-scaled second derivatives of U(A X) with respect to
/// (z, w3, w4) at z = (1, 0), w3 = w4 = 0 (sigma = 1), computed by central
/// finite differences with one Richardson step (h and h/2).
/// Requires 0 < h <= 1e-4; throws ErrorCode::StepSize otherwise.
Eigen::Matrix<double, 6, 6> reduced_hessian_oracle(ShapeParam u,
                                                   double h = 1e-5);

/// Block-diagonal sigma^3 d^2U/d(z, w3, w4)^2 from the closed forms:
/// mu diag(2, -1), 2(m+1) alpha^3 (1+u^2)^{-5/2} diag(2-u^2, 2u^2-1) and
/// the corresponding w4 block.
Eigen::Matrix<double, 6, 6> reduced_hessian_closed_form(ShapeParam u);

}  // namespace rhombus
