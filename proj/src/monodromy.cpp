#include "rhombus/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "rhombus/error.hpp"

namespace rhombus {

namespace {

namespace odeint = boost::numeric::odeint;

using State = std::vector<long double>;

template <class T>
Eigen::Matrix<T, 2, 2> j2() {
  Eigen::Matrix<T, 2, 2> j;
  j << T(0), T(-1), T(1), T(0);
  return j;
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> symplectic(int dim) {
  const int n = dim / 2;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> j =
      Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
  j.block(0, n, n, n) = -Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
  j.block(n, 0, n, n) = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
  return j;
}

template <class T>
T symplectic_residual(const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& m) {
  const auto j = symplectic<T>(static_cast<int>(m.rows()));
  return (m.transpose() * j * m - j).norm();
}

bool eigen_order(const std::complex<double>& a, const std::complex<double>& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma < mb;
  return a.imag() < b.imag();
}

std::vector<std::complex<double>> eigenvalues_of(const MatrixXld& m) {
  Eigen::EigenSolver<MatrixXld> solver(m, false);
  std::vector<std::complex<double>> out;
  out.reserve(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto z = solver.eigenvalues()(i);
    out.emplace_back(static_cast<double>(z.real()),
                     static_cast<double>(z.imag()));
  }
  std::sort(out.begin(), out.end(), eigen_order);
  return out;
}

Classification classify_at(std::span<const std::complex<double>> eigs,
                           double tol, int& off_circle) {
  off_circle = 0;
  for (const auto& z : eigs)
    if (std::abs(std::abs(z) - 1.0) > tol) ++off_circle;
  if (off_circle == static_cast<int>(eigs.size()))
    return Classification::Hyperbolic;
  if (off_circle == 0) return Classification::Elliptic;
  return Classification::Mixed;
}

double relative_distance(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Kepler: return "kepler";
    case BlockKind::Xi: return "xi";
    case BlockKind::Eta: return "eta";
    case BlockKind::Full: return "full";
  }
  return "unknown";
}

BlockKind parse_block(std::string_view name) {
  if (name == "kepler") return BlockKind::Kepler;
  if (name == "xi") return BlockKind::Xi;
  if (name == "eta") return BlockKind::Eta;
  if (name == "full") return BlockKind::Full;
  fail(ErrorCode::Config, "unknown block '" + std::string(name) +
                              "' (expected kepler, xi, eta or full)");
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Hyperbolic: return "hyperbolic";
    case Classification::Elliptic: return "elliptic";
    case Classification::Mixed: return "mixed";
    case Classification::Degenerate: return "degenerate";
  }
  return "unknown";
}

Classification parse_classification(std::string_view name) {
  if (name == "hyperbolic") return Classification::Hyperbolic;
  if (name == "elliptic") return Classification::Elliptic;
  if (name == "mixed") return Classification::Mixed;
  if (name == "degenerate") return Classification::Degenerate;
  fail(ErrorCode::Io, "unknown classification '" + std::string(name) + "'");
}

LinearSystem::LinearSystem(BlockKind kind, ShapeParam u, Eccentricity e)
    : kind_(kind), u_(u), e_(e.value()), phi_(phi(u)), psi_(psi(u)) {}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> LinearSystem::assemble(
    T theta) const {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Mat2 = Eigen::Matrix<T, 2, 2>;
  using std::cos;
  const T c = T(e_) * cos(theta);
  const T k = T(1) / (T(1) + c);

  auto lower_right = [&](BlockKind block) -> Mat2 {
    Mat2 h = Mat2::Zero();
    switch (block) {
      case BlockKind::Kepler:
        h(0, 0) = -(T(2) - c) * k;
        h(1, 1) = T(1);
        break;
      case BlockKind::Xi:
        h(0, 0) = T(1) - k * T(phi_.phi1);
        h(1, 1) = T(1) - k * T(phi_.phi2);
        break;
      case BlockKind::Eta:
        h(0, 0) = T(1) - k * T(psi_.psi1);
        h(1, 1) = T(1) - k * T(psi_.psi2);
        break;
      case BlockKind::Full:
        break;
    }
    return h;
  };

  const std::vector<BlockKind> parts =
      kind_ == BlockKind::Full
          ? std::vector<BlockKind>{BlockKind::Kepler, BlockKind::Xi, BlockKind::Eta}
          : std::vector<BlockKind>{kind_};
  const int n = 2 * static_cast<int>(parts.size());
  Mat b = Mat::Zero(2 * n, 2 * n);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const int o = 2 * static_cast<int>(p);
    b.template block<2, 2>(o, o) = Mat2::Identity();
    b.template block<2, 2>(o, n + o) = -j2<T>();
    b.template block<2, 2>(n + o, o) = j2<T>();
    b.template block<2, 2>(n + o, n + o) = lower_right(parts[p]);
  }
  return b;
}

Eigen::MatrixXd LinearSystem::matrix(double theta) const {
  return assemble<double>(theta);
}

MatrixXld LinearSystem::matrix_extended(long double theta) const {
  return assemble<long double>(theta);
}

Eigen::MatrixXd symplectic_form(int dim) { return symplectic<double>(dim); }

ClassifyResult classify(std::span<const std::complex<double>> eigenvalues,
                        double circle_tol) {
  if (!(circle_tol >= 1e-10 && circle_tol <= 1e-2)) {
    std::ostringstream os;
    os << "circle tolerance " << circle_tol << " outside [1e-10, 1e-2]";
    fail(ErrorCode::Domain, os.str());
  }
  int off = 0, off_half = 0;
  const Classification c = classify_at(eigenvalues, circle_tol, off);
  const Classification c_half = classify_at(eigenvalues, circle_tol / 2, off_half);
  if (c != c_half || off != off_half)
    return {Classification::Degenerate, off / 2};
  return {c, off / 2};
}

ClassifyResult classify(const MonodromyResult& result, double circle_tol) {
  return classify(result.essential_eigenvalues, circle_tol);
}

MonodromyResult fundamental_solution(const LinearSystem& sys,
                                     const IntegrationOptions& opts) {
  if (sys.e() > 0.99) {
    std::ostringstream os;
    os << "eccentricity " << sys.e() << " above the integration cap 0.99";
    fail(ErrorCode::Domain, os.str());
  }
  if (!(opts.rtol >= 1e-19 && opts.atol >= 1e-19)) {
    fail(ErrorCode::Domain, "integration tolerances must be >= 1e-19");
  }
  if (!(opts.theta_end >= 0.0) || opts.checkpoints < 1) {
    fail(ErrorCode::Domain, "invalid integration interval or checkpoint count");
  }

  const int dim = sys.dimension();
  const MatrixXld jmat = symplectic<long double>(dim);

  State state(static_cast<std::size_t>(dim * dim), 0.0L);
  Eigen::Map<MatrixXld>(state.data(), dim, dim).setIdentity();

  auto rhs = [&](const State& x, State& dxdt, long double theta) {
    const MatrixXld jb = jmat * sys.matrix_extended(theta);
    Eigen::Map<MatrixXld>(dxdt.data(), dim, dim).noalias() =
        jb * Eigen::Map<const MatrixXld>(x.data(), dim, dim);
  };

  MonodromyResult r;
  r.kind = sys.kind();
  r.u = sys.u().value();
  r.e = sys.e();
  r.steps = 0;
  r.checkpoint_residual = 0.0;

  if (opts.theta_end > 0.0) {
    using Stepper = odeint::runge_kutta_fehlberg78<State, long double, State,
                                                   long double>;
    auto stepper = odeint::make_controlled<Stepper>(
        static_cast<long double>(opts.atol), static_cast<long double>(opts.rtol));
    const long double end = opts.theta_end;
    long double dt = 1e-3L;
    for (int k = 1; k <= opts.checkpoints; ++k) {
      const long double from = end * (k - 1) / opts.checkpoints;
      const long double to = end * k / opts.checkpoints;
      try {
        r.steps += odeint::integrate_adaptive(stepper, rhs, state, from, to, dt);
      } catch (const std::exception& ex) {
        std::ostringstream os;
        os << "step-size control failed near theta = "
           << static_cast<double>(from) << ": " << ex.what();
        fail(ErrorCode::StepFailure, os.str());
      }
      const long double res = symplectic_residual<long double>(
          Eigen::Map<const MatrixXld>(state.data(), dim, dim));
      if (!std::isfinite(static_cast<double>(res))) {
        fail(ErrorCode::StepFailure, "fundamental solution diverged");
      }
      r.checkpoint_residual = std::max(r.checkpoint_residual, static_cast<double>(res));
    }
  }

  const MatrixXld m = Eigen::Map<const MatrixXld>(state.data(), dim, dim);
  r.M = m.cast<double>();
  r.symplectic_residual = static_cast<double>(symplectic_residual<long double>(m));
  r.determinant = static_cast<double>(m.determinant());
  r.eigenvalues = eigenvalues_of(m);
  if (sys.kind() == BlockKind::Full) {
    // Drop the Kepler rows/columns (Z and z) from the symplectic sum.
    const std::array<int, 8> keep = {2, 3, 4, 5, 8, 9, 10, 11};
    MatrixXld essential(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) essential(i, j) = m(keep[i], keep[j]);
    r.essential_eigenvalues = eigenvalues_of(essential);
  } else {
    r.essential_eigenvalues = r.eigenvalues;
  }

  if (r.symplectic_residual > 10.0 * opts.residual_budget) {
    std::ostringstream os;
    os << "symplectic residual " << r.symplectic_residual
       << " exceeds 10x budget " << opts.residual_budget << " at (u, e) = ("
       << r.u << ", " << r.e << ")";
    fail(ErrorCode::ToleranceNotMet, os.str());
  }
  const auto cls = classify(r.essential_eigenvalues, opts.circle_tol);
  r.classification = cls.classification;
  r.hyperbolic_pairs = cls.hyperbolic_pairs;
  return r;
}

AutonomousSpectrum autonomous_spectrum(ShapeParam u) {
  const auto p = phi(u);
  const auto q = psi(u);
  AutonomousSpectrum s;
  s.p2_trace = 4.0 - p.phi1 - p.phi2;
  s.p2_det = p.phi1 * p.phi2;
  s.p3_trace = 4.0 - q.psi1 - q.psi2;
  s.p3_det = q.psi1 * q.psi2;

  auto biquadratic = [](double b, double c) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * c));
    const std::complex<double> z1 = (-b + disc) / 2.0;
    const std::complex<double> z2 = (-b - disc) / 2.0;
    const std::complex<double> r1 = std::sqrt(z1), r2 = std::sqrt(z2);
    return std::array<std::complex<double>, 4>{r1, -r1, r2, -r2};
  };
  s.p2_roots = biquadratic(s.p2_trace, s.p2_det);
  s.p3_roots = biquadratic(s.p3_trace, s.p3_det);
  return s;
}

double spectral_symmetry_defect(std::span<const std::complex<double>> eigs) {
  double worst = 0.0;
  for (const auto& z : eigs) {
    const std::complex<double> targets[2] = {1.0 / z, std::conj(z)};
    for (const auto& t : targets) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& w : eigs) best = std::min(best, relative_distance(w, t));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

double spectrum_mismatch(std::span<const std::complex<double>> a,
                         std::span<const std::complex<double>> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<std::complex<double>> pool(b.begin(), b.end());
  std::vector<std::complex<double>> order(a.begin(), a.end());
  std::sort(order.begin(), order.end(),
            [](auto x, auto y) { return std::abs(x) > std::abs(y); });
  double worst = 0.0;
  for (const auto& z : order) {
    auto best = pool.begin();
    for (auto it = pool.begin(); it != pool.end(); ++it)
      if (std::abs(*it - z) < std::abs(*best - z)) best = it;
    worst = std::max(worst, relative_distance(*best, z));
    pool.erase(best);
  }
  return worst;
}

int kernel_dimension(const Eigen::MatrixXd& M, std::complex<double> omega,
                     double tol) {
  const Eigen::MatrixXcd shifted =
      M.cast<std::complex<double>>() -
      omega * Eigen::MatrixXcd::Identity(M.rows(), M.cols());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int count = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= cutoff) ++count;
  return count;
}

SymmetryReport symmetry_check(ShapeParam u, Eccentricity e,
                              const IntegrationOptions& opts) {
  const ShapeParam v = u.mirrored();
  const auto xi_u = fundamental_solution(LinearSystem(BlockKind::Xi, u, e), opts);
  const auto xi_v = fundamental_solution(LinearSystem(BlockKind::Xi, v, e), opts);
  const auto eta_u = fundamental_solution(LinearSystem(BlockKind::Eta, u, e), opts);
  const auto eta_v = fundamental_solution(LinearSystem(BlockKind::Eta, v, e), opts);

  Eigen::Matrix4d j4 = Eigen::Matrix4d::Zero();
  j4.block<2, 2>(0, 0) = j2<double>();
  j4.block<2, 2>(2, 2) = j2<double>();
  const Eigen::Matrix4d conj = j4.inverse() * xi_u.M * j4;

  SymmetryReport s;
  s.u = u.value();
  s.e = e.value();
  s.xi_conjugation_defect = (xi_v.M - conj).norm() / xi_u.M.norm();
  s.eta_defect = (eta_v.M - eta_u.M).norm() / eta_u.M.norm();
  s.xi_spectrum_mismatch = spectrum_mismatch(xi_u.eigenvalues, xi_v.eigenvalues);
  s.eta_spectrum_mismatch = spectrum_mismatch(eta_u.eigenvalues, eta_v.eigenvalues);
  return s;
}

}  // namespace rhombus
