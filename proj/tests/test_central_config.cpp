#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rhombus/central_config.hpp"
#include "rhombus/error.hpp"

using namespace rhombus;

namespace {

// Mass ratio evaluated from the defining formula, independent of the library.
double mass_formula(double u) {
  const double u3 = u * u * u;
  const double s = std::pow(1.0 + u * u, 1.5);
  return (8.0 * u3 - u3 * s) / (8.0 * u3 - s);
}

// Second derivatives of U by central differences of the analytic gradient.
Eigen::Matrix<double, 8, 8> fd_hessian(const Eigen::Matrix<double, 8, 1>& q,
                                       const std::array<double, 4>& masses) {
  const double h = 1e-6;
  Eigen::Matrix<double, 8, 8> H;
  for (int k = 0; k < 8; ++k) {
    auto qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    H.col(k) = (potential_gradient(qp, masses) - potential_gradient(qm, masses)) / (2 * h);
  }
  return H;
}

std::vector<double> interior_samples(int n) {
  std::vector<double> out;
  for (int i = 1; i <= n; ++i) out.push_back(kInvSqrt3 + (kSqrt3 - kInvSqrt3) * i / (n + 1));
  return out;
}

}  // namespace

TEST_CASE("shape parameter domain") {
  CHECK_THROWS_AS(ShapeParam(0.5), Error);
  CHECK_THROWS_AS(ShapeParam(1.8), Error);
  CHECK_THROWS_AS(ShapeParam(std::nan("")), Error);
  try {
    ShapeParam(0.1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  CHECK(ShapeParam(1.0 / std::sqrt(3.0)).is_lower_endpoint());
  CHECK(ShapeParam(std::sqrt(3.0)).is_upper_endpoint());
  CHECK(ShapeParam(kInvSqrt3).mirrored().is_upper_endpoint());
  CHECK(ShapeParam(kSqrt3).mirrored().is_lower_endpoint());
  CHECK(ShapeParam(0.8).mirrored().value() == doctest::Approx(1.25).epsilon(1e-15));
  CHECK_FALSE(ShapeParam(1.0).is_endpoint());
}

TEST_CASE("mass ratio") {
  CHECK(mass_ratio(ShapeParam(kSqrt3)) == 0.0);
  CHECK(std::isinf(mass_ratio(ShapeParam(kInvSqrt3))));
  CHECK(mass_ratio(ShapeParam(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mass_ratio(ShapeParam(0.8)) == doctest::Approx(1.5135396).epsilon(1e-7));
  CHECK(mass_ratio(ShapeParam(1.25)) == doctest::Approx(0.6607029).epsilon(1e-7));
  for (double u : interior_samples(40)) {
    const double m = mass_ratio(ShapeParam(u));
    CHECK(m == doctest::Approx(mass_formula(u)).epsilon(1e-14));
    CHECK(m > 0.0);
    // reciprocal symmetry u -> 1/u
    CHECK(m * mass_ratio(ShapeParam(u).mirrored()) == doctest::Approx(1.0).epsilon(1e-11));
  }
}

TEST_CASE("central configuration is normalised and balanced") {
  for (double u : interior_samples(10)) {
    const auto c = build_configuration(ShapeParam(u));
    const auto masses = c.masses();
    Eigen::Vector2d com = Eigen::Vector2d::Zero();
    double inertia = 0.0;
    for (int i = 0; i < 4; ++i) {
      com += masses[i] * c.positions[i];
      inertia += masses[i] * c.positions[i].squaredNorm();
    }
    CHECK(com.norm() < 1e-14);
    CHECK(inertia == doctest::Approx(1.0).epsilon(1e-13));
    // grad U = -mu M a
    CHECK(configuration_residual(c) < 1e-11 * c.mu_potential);
    // homogeneity: a . grad U = -U, so mu = U at unit inertia
    CHECK(c.mu_potential ==
          doctest::Approx(potential(stacked_positions(c), masses)).epsilon(1e-12));
  }
  CHECK(build_configuration(ShapeParam(kSqrt3)).m == 0.0);
  try {
    build_configuration(ShapeParam(kInvSqrt3));
    FAIL("expected singular configuration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularConfiguration);
  }
}

TEST_CASE("potential gradient matches finite differences of the potential") {
  const auto c = build_configuration(ShapeParam(0.9));
  const auto q = stacked_positions(c);
  const auto g = potential_gradient(q, c.masses());
  for (int k = 0; k < 8; ++k) {
    const double h = 1e-6;
    auto qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    const double fd = (potential(qp, c.masses()) - potential(qm, c.masses())) / (2 * h);
    CHECK(g(k) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("Hessian blocks agree with a finite-difference Hessian") {
  for (double u : interior_samples(10)) {
    const ShapeParam s(u);
    const auto c = build_configuration(s);
    const auto H = hessian_blocks(s).dense();
    const auto fd = fd_hessian(stacked_positions(c), c.masses());
    CHECK((H - fd).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, H.cwiseAbs().maxCoeff()));
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // translation invariance
    CHECK(hessian_blocks(s).row_sum_defect() < 1e-12 * H.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("reduction matrix is mass-orthonormal and commutes with J") {
  for (double u : interior_samples(10)) {
    const auto r = reduction_matrix(ShapeParam(u));
    CHECK(r.orthonormality_defect() < 1e-12);
    CHECK(r.commutation_defect() < 1e-12);
  }
  CHECK_THROWS_AS(reduction_matrix(ShapeParam(kInvSqrt3)), Error);
  CHECK_THROWS_AS(reduction_matrix(ShapeParam(kSqrt3)), Error);
}

TEST_CASE("z column is the configuration itself") {
  const ShapeParam s(1.2);
  const auto c = build_configuration(s);
  const auto r = reduction_matrix(s);
  // second column of the z pair is the position vector a
  const Eigen::Matrix<double, 8, 1> z = r.columns(ReducedCoordinate::Z).col(0);
  CHECK((z - stacked_positions(c)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("reduced Hessian: finite differences against closed forms") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(kInvSqrt3 + 1e-3, kSqrt3 - 1e-3);
  for (int i = 0; i < 10; ++i) {
    const ShapeParam s(dist(rng));
    const auto fd = reduced_hessian_oracle(s);
    const auto closed = reduced_hessian_closed_form(s);
    const double scale = std::max(1.0, closed.cwiseAbs().maxCoeff());
    // off-diagonal coupling blocks vanish
    CHECK(fd.block<2, 4>(0, 2).cwiseAbs().maxCoeff() < 1e-6 * scale);
    CHECK(fd.block<2, 2>(2, 4).cwiseAbs().maxCoeff() < 1e-6 * scale);
    CHECK((fd - closed).cwiseAbs().maxCoeff() < 1e-6 * scale);
  }
}

TEST_CASE("reduced Hessian from the projected potential Hessian") {
  // A^T D^2U A restricted to (z, w3, w4) is a second, purely algebraic oracle.
  for (double u : interior_samples(6)) {
    const ShapeParam s(u);
    const auto r = reduction_matrix(s);
    const Eigen::Matrix<double, 8, 6> cols = r.A.rightCols<6>();
    const Eigen::Matrix<double, 6, 6> proj = cols.transpose() * hessian_blocks(s).dense() * cols;
    const auto closed = reduced_hessian_closed_form(s);
    CHECK((proj - closed).cwiseAbs().maxCoeff() <
          1e-10 * closed.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("finite-difference step validation") {
  try {
    reduced_hessian_oracle(ShapeParam(0.9), 1e-3);
    FAIL("expected step size error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepSize);
  }
  CHECK_THROWS_AS(reduced_hessian_oracle(ShapeParam(0.9), 0.0), Error);
}
