#include "rhombus/reduced_coeffs.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <unsupported/Eigen/AutoDiff>

#include "rhombus/error.hpp"

namespace rhombus {

namespace {

using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;

template <class T>
struct RawCoefficients {
  T phi1, phi2, psi1, psi2;
};

// Closed forms in terms of m(u), alpha(u), mu(u); valid on the open interval.
template <class T>
RawCoefficients<T> raw_coefficients(const T& u) {
  using std::pow;
  using std::sqrt;
  const T u2 = u * u;
  const T u3 = u2 * u;
  const T s = 1.0 + u2;
  const T s32 = pow(s, 1.5);
  const T s52 = pow(s, 2.5);
  const T m = (8.0 * u3 - u3 * s32) / (8.0 * u3 - s32);
  const T alpha = sqrt(2.0 * m * u2 + 2.0);
  const T mu = 4.0 * m * alpha / sqrt(s) + alpha * m * m / (2.0 * u) + alpha / 2.0;

  const T c = 2.0 * (m + 1.0) * alpha * alpha * alpha / (mu * s52);
  const T k = 4.0 * alpha / mu;
  const T p1 = 2.0 * m * m * u2 * u2 + (6.0 * m - m * m - 1.0) * u2 + 2.0;
  const T p2 = -m * m * u2 * u2 + (2.0 * m * m - 6.0 * m + 2.0) * u2 - 1.0;
  const T tail = m * u2 / 8.0 + m / (8.0 * u3);

  RawCoefficients<T> r;
  r.phi1 = 1.0 + c * (2.0 - u2);
  r.phi2 = 1.0 + c * (2.0 * u2 - 1.0);
  r.psi1 = 1.0 + k * (p1 / s52 - tail);
  r.psi2 = 1.0 + k * (p2 / s52 + 2.0 * tail);
  return r;
}

struct Slopes {
  double phi1, phi2, psi1, psi2;
};

Slopes raw_slopes(double u) {
  const Dual x(u, 1, 0);
  const auto r = raw_coefficients(x);
  return {r.phi1.derivatives()(0), r.phi2.derivatives()(0),
          r.psi1.derivatives()(0), r.psi2.derivatives()(0)};
}

template <class F>
double bracketed_root(F f, double lo, double hi, const char* what) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo * fhi < 0.0)) {
    std::ostringstream os;
    os << "no sign change for " << what << " on [" << lo << ", " << hi << "]";
    fail(ErrorCode::Bracketing, os.str());
  }
  boost::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52),
      iterations);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace

Eccentricity::Eccentricity(double e) : e_(e) {
  if (!(e >= 0.0 && e < 1.0)) {
    std::ostringstream os;
    os << "eccentricity e = " << e << " outside [0, 1)";
    fail(ErrorCode::Domain, os.str());
  }
}

PhiPair phi(ShapeParam u) {
  if (u.is_lower_endpoint()) return {2.25, 0.75};
  if (u.is_upper_endpoint()) return {0.75, 2.25};
  const auto r = raw_coefficients(u.value());
  return {r.phi1, r.phi2};
}

PsiPair psi(ShapeParam u) {
  if (u.is_endpoint()) return {0.75, 2.25};
  const auto r = raw_coefficients(u.value());
  return {r.psi1, r.psi2};
}

CoefficientDerivatives coefficient_derivatives(ShapeParam u) {
  Slopes d;
  if (u.is_lower_endpoint()) {
    // phi1(u) = phi2(1/u), psi_i(u) = psi_i(1/u)
    const double v = kSqrt3;
    const Slopes m = raw_slopes(v);
    const double chain = -v * v;
    d = {chain * m.phi2, chain * m.phi1, chain * m.psi1, chain * m.psi2};
  } else {
    d = raw_slopes(u.value());
  }
  const auto p = phi(u);
  const auto q = psi(u);
  CoefficientDerivatives out;
  out.phi_diff = d.phi2 - d.phi1;
  out.psi_diff = d.psi1 - d.psi2;
  out.phi_prod = d.phi1 * p.phi2 + p.phi1 * d.phi2;
  out.psi_prod = d.psi1 * q.psi2 + q.psi1 * d.psi2;
  out.phi_trace = -d.phi1 - d.phi2;
  return out;
}

ReducedCoefficients reduced_coefficients(ShapeParam u) {
  const auto p = phi(u);
  const auto q = psi(u);
  const auto d = coefficient_derivatives(u);
  return {u.value(), p.phi1, p.phi2, q.psi1, q.psi2, d.phi_diff, d.psi_diff};
}

CoefficientMatrices coefficient_matrices(ShapeParam u, Eccentricity e,
                                         double t) {
  const double k = 1.0 / (1.0 + e.value() * std::cos(t));
  const auto p = phi(u);
  const auto q = psi(u);
  CoefficientMatrices out;
  out.K = k * Eigen::Vector2d(p.phi1, p.phi2).asDiagonal();
  out.T = k * Eigen::Vector2d(q.psi1, q.psi2).asDiagonal();
  return out;
}

Eigen::Matrix2d rotation(double t) {
  Eigen::Matrix2d r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

Eigen::Matrix2d reflection(double t) {
  Eigen::Matrix2d s;
  s << std::cos(2.0 * t), std::sin(2.0 * t), std::sin(2.0 * t),
      -std::cos(2.0 * t);
  return s;
}

Eigen::Matrix2d rotated_form(ShapeParam u, Eccentricity e, double t,
                             RotatedBlock which) {
  const auto km = coefficient_matrices(u, e, t);
  const Eigen::Matrix2d r = rotation(t);
  const Eigen::Matrix2d& c = which == RotatedBlock::A ? km.K : km.T;
  return r * c * r.transpose();
}

Eigen::Matrix2d rotated_closed_form(ShapeParam u, Eccentricity e, double t,
                                    RotatedBlock which) {
  double c1, c2;
  if (which == RotatedBlock::A) {
    const auto p = phi(u);
    c1 = p.phi1;
    c2 = p.phi2;
  } else {
    const auto q = psi(u);
    c1 = q.psi1;
    c2 = q.psi2;
  }
  const double scale = 1.0 / (2.0 * (1.0 + e.value() * std::cos(t)));
  return scale * ((c1 + c2) * Eigen::Matrix2d::Identity() +
                  (c1 - c2) * reflection(t));
}

CriticalParams find_critical_params(double tol) {
  if (!(tol >= 1e-12)) {
    std::ostringstream os;
    os << "critical-parameter tolerance " << tol << " below 1e-12";
    fail(ErrorCode::Domain, os.str());
  }
  auto dphi = [](double u) {
    return coefficient_derivatives(ShapeParam(u)).phi_diff;
  };
  auto psi_gap = [](double u) {
    const auto q = psi(ShapeParam(u));
    return q.psi1 - q.psi2;
  };
  auto dpsi_prod = [](double u) {
    return coefficient_derivatives(ShapeParam(u)).psi_prod;
  };

  CriticalParams c;
  c.u1 = bracketed_root(dphi, 0.58, 0.65, "d(phi2 - phi1)/du");
  c.u2 = bracketed_root(dphi, 1.0 / 0.65, kSqrt3, "d(phi2 - phi1)/du");
  c.u3 = bracketed_root(psi_gap, 0.6, 0.7, "psi1 - psi2");
  c.u3_bar = bracketed_root(dpsi_prod, 0.6, 0.7, "d(psi1 psi2)/du");

  const auto p = phi(ShapeParam(c.u1));
  c.phi_diff_u1 = p.phi1 - p.phi2;
  c.phi_sum_u1 = p.phi1 + p.phi2;
  c.beta1 = 9.0 - c.phi_diff_u1 * c.phi_diff_u1;
  const auto q = psi(ShapeParam(c.u3));
  c.psi_prod_u3 = q.psi1 * q.psi2;

  c.max_residual = std::max({std::abs(dphi(c.u1)), std::abs(dphi(c.u2)),
                             std::abs(psi_gap(c.u3)),
                             std::abs(dpsi_prod(c.u3_bar))});
  if (c.max_residual > tol) {
    std::ostringstream os;
    os << "critical-parameter residual " << c.max_residual
       << " exceeds tolerance " << tol;
    fail(ErrorCode::NonConvergence, os.str());
  }
  return c;
}

}  // namespace rhombus
