#include "rhombus/spectral_index.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <unsupported/Eigen/FFT>

#include "rhombus/error.hpp"

namespace rhombus {

namespace {

struct Spectrum {
  Eigen::VectorXd values;  // ascending
  double scale;
};

Spectrum spectrum(const OperatorSpec& spec, double rho, int N) {
  const auto g = assemble(spec, rho, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(g.H, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NonConvergence, "Hermitian eigensolver failed");
  }
  Spectrum s{solver.eigenvalues(), 0.0};
  s.scale = s.values.cwiseAbs().maxCoeff();
  return s;
}

struct Counts {
  int negative;
  int zero;
  double min_eig;
  bool operator==(const Counts& o) const {
    return negative == o.negative && zero == o.zero;
  }
};

Counts count(const Spectrum& s, double zero_tol) {
  const double thr = zero_tol * s.scale;
  Counts c{0, 0, s.values(0)};
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    const double v = s.values(i);
    if (std::abs(v) <= thr) ++c.zero;
    else if (v < 0.0) ++c.negative;
  }
  return c;
}

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    std::ostringstream os;
    os << "rho = " << rho << " outside [0, 1)";
    fail(ErrorCode::Domain, os.str());
  }
}

}  // namespace

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::ScriptA: return "scriptA";
    case OperatorKind::ScriptB: return "scriptB";
    case OperatorKind::ABeta: return "Abeta";
    case OperatorKind::ScriptABar: return "scriptAbar";
  }
  return "unknown";
}

OperatorKind parse_operator(std::string_view name) {
  if (name == "scriptA") return OperatorKind::ScriptA;
  if (name == "scriptB") return OperatorKind::ScriptB;
  if (name == "Abeta") return OperatorKind::ABeta;
  if (name == "scriptAbar") return OperatorKind::ScriptABar;
  fail(ErrorCode::Config, "unknown operator '" + std::string(name) +
                              "' (expected scriptA, scriptB, Abeta or scriptAbar)");
}

OperatorSpec OperatorSpec::script_a(ShapeParam u, Eccentricity e) {
  const auto p = phi(u);
  return {OperatorKind::ScriptA, u.value(), e.value(), 1.0,
          p.phi1 + p.phi2, p.phi1 - p.phi2};
}

OperatorSpec OperatorSpec::script_b(ShapeParam u, Eccentricity e) {
  const auto q = psi(u);
  return {OperatorKind::ScriptB, u.value(), e.value(), 1.0,
          q.psi1 + q.psi2, q.psi1 - q.psi2};
}

OperatorSpec OperatorSpec::a_beta(double beta, Eccentricity e) {
  if (!(beta >= 0.0 && beta <= 9.0)) {
    std::ostringstream os;
    os << "beta = " << beta << " outside [0, 9]";
    fail(ErrorCode::Domain, os.str());
  }
  return {OperatorKind::ABeta, beta, e.value(), 1.0, 3.0, std::sqrt(9.0 - beta)};
}

OperatorSpec OperatorSpec::script_a_bar(ShapeParam u, Eccentricity e) {
  const auto p = phi(u);
  const double d = p.phi1 - p.phi2;
  if (d == 0.0) {
    fail(ErrorCode::Domain, "normalised operator undefined at u = 1");
  }
  const double phi_one = phi(ShapeParam(1.0)).phi1;
  const double ad = std::abs(d);
  return {OperatorKind::ScriptABar, u.value(), e.value(), 1.0 / ad,
          2.0 * phi_one / ad, d > 0.0 ? 1.0 : -1.0};
}

double kernel_decay_ratio(double e) {
  if (e == 0.0) return 0.0;
  return (std::sqrt(1.0 - e * e) - 1.0) / e;
}

std::vector<double> kernel_fourier_coefficients(Eccentricity ecc, int kmax) {
  if (kmax < 1) fail(ErrorCode::Domain, "kmax must be >= 1");
  const double e = ecc.value();
  const double r = std::abs(kernel_decay_ratio(e));
  int extra = 2;
  if (r > 0.0) extra = static_cast<int>(std::ceil(std::log(1e-17) / std::log(r))) + 1;
  std::size_t L = 8;
  while (L < static_cast<std::size_t>(std::max(2 * kmax + 2, kmax + extra))) L *= 2;

  std::vector<double> samples(L);
  for (std::size_t j = 0; j < L; ++j) {
    const double t = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(L);
    samples[j] = 1.0 / (1.0 + e * std::cos(t));
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, samples);

  std::vector<double> c(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) c[k] = spec[k].real() / static_cast<double>(L);
  return c;
}

GalerkinMatrix assemble(const OperatorSpec& spec, double rho, int N) {
  if (N < 8) fail(ErrorCode::Domain, "truncation N must be >= 8");
  check_rho(rho);
  const Eccentricity ecc(spec.e);

  // F_n: coefficients of 1/(2(1 + e cos t)), needed up to |n| = 2N + 2.
  const int nmax = 2 * N + 2;
  auto c = kernel_fourier_coefficients(ecc, nmax);
  auto F = [&](int n) { return 0.5 * c[static_cast<std::size_t>(std::abs(n))]; };
  const std::complex<double> inv2i(0.0, -0.5);

  const int dim = 2 * (2 * N + 1);
  GalerkinMatrix g;
  g.H = Eigen::MatrixXcd::Zero(dim, dim);
  g.N = N;
  g.rho = rho;
  for (int j = -N; j <= N; ++j) {
    for (int k = -N; k <= N; ++k) {
      const int n = j - k;
      const double fn = F(n);
      const double cn = 0.5 * (F(n - 2) + F(n + 2));
      const std::complex<double> sn = inv2i * (F(n - 2) - F(n + 2));
      const int r0 = 2 * (j + N);
      const int c0 = 2 * (k + N);
      g.H(r0, c0) = spec.a * fn + spec.b * cn;
      g.H(r0 + 1, c0 + 1) = spec.a * fn - spec.b * cn;
      g.H(r0, c0 + 1) = spec.b * sn;
      g.H(r0 + 1, c0) = spec.b * sn;
    }
    const double kr = j + rho;
    const double d = spec.diff_scale * (kr * kr - 1.0);
    const int r0 = 2 * (j + N);
    g.H(r0, r0) += d;
    g.H(r0 + 1, r0 + 1) += d;
  }
  g.tail_estimate = c[0] > 0.0 ? std::abs(c[static_cast<std::size_t>(N)]) / c[0] : 0.0;
  g.truncated = g.tail_estimate > kTailTolerance;
  return g;
}

double hermitian_residual(const Eigen::MatrixXcd& H) {
  return (H - H.adjoint()).cwiseAbs().maxCoeff();
}

int default_truncation(double e) {
  if (e <= 0.8) return 64;
  const double scaled = 64.0 * 0.2 / (1.0 - std::min(e, 0.99));
  return std::min(512, static_cast<int>(std::ceil(scaled - 1e-9)));
}

IndexResult morse_index(const OperatorSpec& spec, double rho, int N,
                        double zero_tol) {
  if (!(zero_tol > 0.0 && zero_tol < 1.0)) {
    fail(ErrorCode::Domain, "zero tolerance must lie in (0, 1)");
  }
  const Counts a = count(spectrum(spec, rho, N), zero_tol);
  const Counts b = count(spectrum(spec, rho, 2 * N), zero_tol);
  Counts chosen = b;
  int trunc = 2 * N;
  if (!(a == b)) {
    const Counts c = count(spectrum(spec, rho, 4 * N), zero_tol);
    if (!(b == c)) {
      std::ostringstream os;
      os << "index of " << to_string(spec.kind) << " not stable under refinement: "
         << a.negative << "/" << b.negative << "/" << c.negative
         << " negative at N = " << N << ", " << 2 * N << ", " << 4 * N;
      fail(ErrorCode::NonConvergence, os.str());
    }
    chosen = c;
    trunc = 4 * N;
  }
  IndexResult r;
  r.rho = rho;
  r.omega = std::polar(1.0, 2.0 * M_PI * rho);
  r.morse_index = chosen.negative;
  r.nullity = chosen.zero;
  r.min_eigenvalue = chosen.min_eig;
  r.truncation = trunc;
  r.converged = true;
  return r;
}

double min_eigenvalue(const OperatorSpec& spec, double rho, int N) {
  return spectrum(spec, rho, N).values(0);
}

std::vector<PositivityEntry> positivity_scan(const OperatorFamily& family,
                                             std::span<const double> e_grid,
                                             std::span<const double> rho_grid,
                                             int N) {
  std::vector<PositivityEntry> out;
  out.reserve(e_grid.size() * rho_grid.size());
  for (double e : e_grid) {
    const OperatorSpec spec = family(Eccentricity(e));
    for (double rho : rho_grid) {
      const auto s = spectrum(spec, rho, N);
      const double lo = s.values(0);
      out.push_back({e, rho, lo, lo > 1e-8 * s.scale});
    }
  }
  return out;
}

}  // namespace rhombus
