#include "rhombus/central_config.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rhombus/error.hpp"

namespace rhombus {

namespace {

Eigen::Matrix2d j2() {
  Eigen::Matrix2d j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

Eigen::Matrix2d diag2(double a, double b) {
  return Eigen::Vector2d(a, b).asDiagonal();
}

// Kepler coordinate z, then w3, w4 stacked into 6 reduced coordinates.
Eigen::Matrix<double, 8, 6> reduced_columns(const ReductionMatrix& r) {
  return r.A.rightCols<6>();
}

// Gradient of X -> U(A X) in the reduced coordinates (z, w3, w4).
Eigen::Matrix<double, 6, 1> reduced_gradient(
    const Eigen::Matrix<double, 8, 6>& cols,
    const std::array<double, 4>& masses, const Eigen::Matrix<double, 6, 1>& x) {
  const Eigen::Matrix<double, 8, 1> q = cols * x;
  return cols.transpose() * potential_gradient(q, masses);
}

}  // namespace

ShapeParam::ShapeParam(double u) : u_(u) {
  // Values within a few ulps of an endpoint snap onto it so that 1/u of an
  // endpoint is again admissible.
  constexpr double kSnap = 8 * std::numeric_limits<double>::epsilon();
  if (std::abs(u - kInvSqrt3) <= kSnap * kInvSqrt3) u_ = kInvSqrt3;
  if (std::abs(u - kSqrt3) <= kSnap * kSqrt3) u_ = kSqrt3;
  if (!(u_ >= kInvSqrt3 && u_ <= kSqrt3)) {
    std::ostringstream os;
    os << "shape parameter u = " << u << " outside [1/sqrt(3), sqrt(3)]";
    fail(ErrorCode::Domain, os.str());
  }
}

ShapeParam ShapeParam::mirrored() const {
  if (is_lower_endpoint()) return ShapeParam(kSqrt3);
  if (is_upper_endpoint()) return ShapeParam(kInvSqrt3);
  return ShapeParam(1.0 / u_);
}

double mass_ratio(ShapeParam shape) {
  if (shape.is_lower_endpoint()) return std::numeric_limits<double>::infinity();
  if (shape.is_upper_endpoint()) return 0.0;
  const double u = shape.value();
  const double u3 = u * u * u;
  const double s32 = std::pow(1.0 + u * u, 1.5);
  return (8.0 * u3 - u3 * s32) / (8.0 * u3 - s32);
}

CentralConfiguration build_configuration(ShapeParam shape) {
  if (shape.is_lower_endpoint()) {
    fail(ErrorCode::SingularConfiguration,
         "rhombus configuration is singular at u = 1/sqrt(3) (infinite mass "
         "ratio)");
  }
  const double u = shape.value();
  const double m = mass_ratio(shape);
  const double alpha = std::sqrt(2.0 * m * u * u + 2.0);
  const double mu = 4.0 * m * alpha / std::sqrt(1.0 + u * u) +
                    alpha * m * m / (2.0 * u) + alpha / 2.0;
  CentralConfiguration c{shape, m, alpha, mu, {}};
  c.positions[0] = Eigen::Vector2d(0.0, u) / alpha;
  c.positions[1] = Eigen::Vector2d(1.0, 0.0) / alpha;
  c.positions[2] = -c.positions[0];
  c.positions[3] = -c.positions[1];
  return c;
}

double potential(const Eigen::Matrix<double, 8, 1>& q,
                 const std::array<double, 4>& masses) {
  double u = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double r = (q.segment<2>(2 * i) - q.segment<2>(2 * j)).norm();
      u += masses[i] * masses[j] / r;
    }
  }
  return u;
}

Eigen::Matrix<double, 8, 1> potential_gradient(
    const Eigen::Matrix<double, 8, 1>& q, const std::array<double, 4>& masses) {
  Eigen::Matrix<double, 8, 1> g = Eigen::Matrix<double, 8, 1>::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      const Eigen::Vector2d d = q.segment<2>(2 * j) - q.segment<2>(2 * i);
      const double r = d.norm();
      g.segment<2>(2 * i) += masses[i] * masses[j] * d / (r * r * r);
    }
  }
  return g;
}

Eigen::Matrix<double, 8, 1> stacked_positions(const CentralConfiguration& c) {
  Eigen::Matrix<double, 8, 1> q;
  for (int i = 0; i < 4; ++i) q.segment<2>(2 * i) = c.positions[i];
  return q;
}

double configuration_residual(const CentralConfiguration& c) {
  const auto masses = c.masses();
  const auto grad = potential_gradient(stacked_positions(c), masses);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d r =
        grad.segment<2>(2 * i) + c.mu_potential * masses[i] * c.positions[i];
    worst = std::max(worst, r.norm());
  }
  return worst;
}

Eigen::Matrix<double, 8, 8> PotentialHessian::dense() const {
  Eigen::Matrix<double, 8, 8> h;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h.block<2, 2>(2 * i, 2 * j) = blocks[i][j];
  return h;
}

double PotentialHessian::row_sum_defect() const {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    for (int j = 0; j < 4; ++j) s += blocks[i][j];
    worst = std::max(worst, s.cwiseAbs().maxCoeff());
  }
  return worst;
}

PotentialHessian hessian_blocks(ShapeParam shape) {
  const auto c = build_configuration(shape);
  const double u = shape.value();
  const double m = c.m;
  const double a3 = c.alpha * c.alpha * c.alpha;
  const double side = a3 * m / std::pow(1.0 + u * u, 2.5);

  Eigen::Matrix2d b12;
  b12 << u * u - 2.0, 3.0 * u, 3.0 * u, 1.0 - 2.0 * u * u;
  b12 *= side;
  Eigen::Matrix2d b14;
  b14 << u * u - 2.0, -3.0 * u, -3.0 * u, 1.0 - 2.0 * u * u;
  b14 *= side;
  const Eigen::Matrix2d b13 = a3 * m * m / (8.0 * u * u * u) * diag2(1.0, -2.0);
  const Eigen::Matrix2d b24 = a3 / 8.0 * diag2(-2.0, 1.0);
  const Eigen::Matrix2d edge = 2.0 * side * diag2(2.0 - u * u, 2.0 * u * u - 1.0);

  PotentialHessian h;
  h.blocks[0][1] = h.blocks[1][0] = h.blocks[2][3] = h.blocks[3][2] = b12;
  h.blocks[0][3] = h.blocks[3][0] = h.blocks[1][2] = h.blocks[2][1] = b14;
  h.blocks[0][2] = h.blocks[2][0] = b13;
  h.blocks[1][3] = h.blocks[3][1] = b24;
  h.blocks[0][0] = h.blocks[2][2] = edge - b13;
  h.blocks[1][1] = h.blocks[3][3] = edge - b24;
  return h;
}

double ReductionMatrix::orthonormality_defect() const {
  const Eigen::Matrix<double, 8, 8> d =
      A.transpose() * mass_matrix * A - Eigen::Matrix<double, 8, 8>::Identity();
  return d.cwiseAbs().maxCoeff();
}

double ReductionMatrix::commutation_defect() const {
  Eigen::Matrix<double, 8, 8> jt = Eigen::Matrix<double, 8, 8>::Zero();
  for (int i = 0; i < 4; ++i) jt.block<2, 2>(2 * i, 2 * i) = j2();
  return (jt * A - A * jt).cwiseAbs().maxCoeff();
}

ReductionMatrix reduction_matrix(ShapeParam shape) {
  if (shape.is_endpoint()) {
    fail(ErrorCode::SingularConfiguration,
         "reduction matrix undefined at the endpoints u = 1/sqrt(3), sqrt(3)");
  }
  const auto c = build_configuration(shape);
  const double u = shape.value();
  const double m = c.m;
  const double alpha = c.alpha;
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d J = j2();

  ReductionMatrix r;
  r.mass_matrix.setZero();
  const std::array<double, 4> masses = c.masses();
  for (int i = 0; i < 4; ++i)
    r.mass_matrix.block<2, 2>(2 * i, 2 * i) = masses[i] * I;

  const double g = 1.0 / std::sqrt(2.0 * m + 2.0);
  const std::array<Eigen::Matrix2d, 4> col_z = {
      u / alpha * J, I / alpha, -u / alpha * J, -I / alpha};
  const double w3_heavy = -1.0 / std::sqrt(2.0 * m * m + 2.0 * m);
  const double w3_light = std::sqrt(m / (2.0 * m + 2.0));
  const std::array<Eigen::Matrix2d, 4> col_w3 = {
      w3_heavy * I, w3_light * I, w3_heavy * I, w3_light * I};
  const double sm = std::sqrt(m);
  const std::array<Eigen::Matrix2d, 4> col_w4 = {
      -1.0 / (sm * alpha) * I, -u * sm / alpha * J, 1.0 / (sm * alpha) * I,
      u * sm / alpha * J};

  for (int i = 0; i < 4; ++i) {
    r.A.block<2, 2>(2 * i, 0) = g * I;
    r.A.block<2, 2>(2 * i, 2) = col_z[i];
    r.A.block<2, 2>(2 * i, 4) = col_w3[i];
    r.A.block<2, 2>(2 * i, 6) = col_w4[i];
  }
  return r;
}

Eigen::Matrix<double, 6, 6> reduced_hessian_oracle(ShapeParam shape, double h) {
  if (!(h > 0.0 && h <= 1e-4)) {
    std::ostringstream os;
    os << "finite-difference step h = " << h << " outside (0, 1e-4]";
    fail(ErrorCode::StepSize, os.str());
  }
  const auto r = reduction_matrix(shape);
  const auto masses = build_configuration(shape).masses();
  const auto cols = reduced_columns(r);

  Eigen::Matrix<double, 6, 1> x0 = Eigen::Matrix<double, 6, 1>::Zero();
  x0(0) = 1.0;

  auto central = [&](double step) {
    Eigen::Matrix<double, 6, 6> hess;
    for (int k = 0; k < 6; ++k) {
      Eigen::Matrix<double, 6, 1> xp = x0, xm = x0;
      xp(k) += step;
      xm(k) -= step;
      hess.col(k) = (reduced_gradient(cols, masses, xp) -
                     reduced_gradient(cols, masses, xm)) /
                    (2.0 * step);
    }
    return hess;
  };
  const Eigen::Matrix<double, 6, 6> coarse = central(h);
  const Eigen::Matrix<double, 6, 6> fine = central(h / 2.0);
  const Eigen::Matrix<double, 6, 6> extrapolated = (4.0 * fine - coarse) / 3.0;
  return 0.5 * (extrapolated + extrapolated.transpose());
}

Eigen::Matrix<double, 6, 6> reduced_hessian_closed_form(ShapeParam shape) {
  const auto c = build_configuration(shape);
  const double u = shape.value();
  const double u2 = u * u;
  const double m = c.m;
  const double alpha = c.alpha;
  const double s52 = std::pow(1.0 + u2, 2.5);

  Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
  h.block<2, 2>(0, 0) = c.mu_potential * diag2(2.0, -1.0);
  h.block<2, 2>(2, 2) = 2.0 * (m + 1.0) * alpha * alpha * alpha / s52 *
                        diag2(2.0 - u2, 2.0 * u2 - 1.0);
  const double p1 = 2.0 * m * m * u2 * u2 + (6.0 * m - m * m - 1.0) * u2 + 2.0;
  const double p2 = -m * m * u2 * u2 + (2.0 * m * m - 6.0 * m + 2.0) * u2 - 1.0;
  const double tail = m * u2 / 8.0 + m / (8.0 * u2 * u);
  h.block<2, 2>(4, 4) =
      4.0 * alpha * (diag2(p1, p2) / s52 + tail * diag2(-1.0, 2.0));
  return h;
}

}  // namespace rhombus
