// Acceptance checks. Usage: acceptance <path-to-rhombus_cli>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <thread>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "rhombus/central_config.hpp"
#include "rhombus/monodromy.hpp"
#include "rhombus/reduced_coeffs.hpp"
#include "rhombus/scan.hpp"
#include "rhombus/spectral_index.hpp"

using namespace rhombus;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream note;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) note << "failed: ";
      else note << "; ";
      note << what;
      ok = false;
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_s,
               const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& ex) {
    o.require(false, std::string("exception: ") + ex.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0) {
    std::ostringstream lim;
    lim << "runtime " << secs << " s exceeds " << limit_s << " s";
    o.require(secs < limit_s, lim.str());
  }
  if (!o.ok) ++failures;
  std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", o.ok ? "PASS" : "FAIL", id, title.c_str(), secs,
              o.note.str().empty() ? "" : "  ", o.note.str().c_str());
  std::fflush(stdout);
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

std::vector<double> interior(int n) {
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) v.push_back(kInvSqrt3 + (kSqrt3 - kInvSqrt3) * i / (n + 1));
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void crit_parameters(Outcome& o) {
  const auto c = find_critical_params();
  o.require(std::abs(c.u1 - 0.606169) <= 1e-4, "u1");
  o.require(std::abs(c.u3 - 0.6633) <= 1e-3, "u3");
  o.require(std::abs(c.beta1 - 6.66958) <= 1e-3, "beta1");
  o.require(std::abs(c.phi_diff_u1 - 1.52657) <= 1e-4, "phi1-phi2 at u1");
  o.require(std::abs(c.phi_sum_u1 - 3.10002) <= 1e-4, "phi1+phi2 at u1");
}

void crit_identities(Outcome& o) {
  double sum = 0.0, mirror_phi = 0.0, mirror_psi = 0.0;
  for (double u : grid(kInvSqrt3, kSqrt3, 1000)) {
    const ShapeParam s(u), r(std::clamp(1.0 / u, kInvSqrt3, kSqrt3));
    const auto q = psi(s), qr = psi(r);
    const auto p = phi(s), pr = phi(r);
    sum = std::max(sum, std::abs(q.psi1 + q.psi2 - 3.0));
    mirror_phi = std::max({mirror_phi, std::abs(p.phi1 - pr.phi2), std::abs(p.phi2 - pr.phi1)});
    mirror_psi = std::max({mirror_psi, std::abs(q.psi1 - qr.psi1), std::abs(q.psi2 - qr.psi2)});
  }
  o.require(sum <= 1e-10, "psi1 + psi2 = 3");
  o.require(mirror_phi <= 1e-10, "phi mirror");
  o.require(mirror_psi <= 1e-10, "psi mirror");
  const auto lo = phi(ShapeParam(kInvSqrt3)), hi = phi(ShapeParam(kSqrt3));
  o.require(lo.phi1 == 2.25 && lo.phi2 == 0.75 && hi.phi1 == 0.75 && hi.phi2 == 2.25, "phi limits");
  for (double u : {kInvSqrt3, kSqrt3}) {
    const auto q = psi(ShapeParam(u));
    o.require(q.psi1 == 0.75 && q.psi2 == 2.25, "psi limits");
  }
}

void crit_bounds(Outcome& o) {
  const double slack = 1e-8;
  const double s2 = std::sqrt(2.0);
  for (double u : grid(kInvSqrt3, kSqrt3, 1000)) {
    const auto p = phi(ShapeParam(u));
    const auto q = psi(ShapeParam(u));
    const double prod = p.phi1 * p.phi2;
    const double tr = 4.0 - p.phi1 - p.phi2;
    const double qprod = q.psi1 * q.psi2;
    o.require(prod >= 27.0 / 16.0 - slack && prod <= (233.0 - 60.0 * s2) / 49.0 + slack, "phi1 phi2 bounds");
    o.require(tr >= (-2.0 + 4.0 * s2) / 7.0 - slack && tr <= 1.0 + slack, "4 - phi1 - phi2 bounds");
    o.require(tr * tr - 4.0 * prod <= -23.0 / 4.0 + slack, "discriminant bound");
    o.require(qprod >= 27.0 / 16.0 - slack && qprod <= 2.25 + slack, "psi1 psi2 bounds");
    if (!o.ok) return;
  }
}

void crit_reduction(Outcome& o) {
  for (double u : interior(10)) {
    const ShapeParam s(u);
    const auto r = reduction_matrix(s);
    o.require(r.orthonormality_defect() <= 1e-12, "A^T M A = I");
    o.require(r.commutation_defect() <= 1e-12, "J A = A J");
    const auto fd = reduced_hessian_oracle(s);
    const auto closed = reduced_hessian_closed_form(s);
    o.require(fd.block<2, 4>(0, 2).cwiseAbs().maxCoeff() <= 1e-6, "(z, w) coupling");
    o.require(fd.block<2, 2>(2, 4).cwiseAbs().maxCoeff() <= 1e-6, "(w3, w4) coupling");
    for (int b = 0; b < 3; ++b)
      o.require((fd.block<2, 2>(2 * b, 2 * b) - closed.block<2, 2>(2 * b, 2 * b)).cwiseAbs().maxCoeff() <= 1e-6,
                "diagonal block vs closed form");
    if (!o.ok) return;
  }
}

void crit_circular(Outcome& o) {
  double worst = 0.0;
  for (double u : interior(20)) {
    const ShapeParam s(u);
    const auto a = autonomous_spectrum(s);
    for (auto kind : {BlockKind::Xi, BlockKind::Eta}) {
      const auto& roots = kind == BlockKind::Xi ? a.p2_roots : a.p3_roots;
      std::vector<std::complex<double>> expected;
      for (const auto& z : roots) {
        o.require(z.real() != 0.0, "root with zero real part");
        expected.push_back(std::exp(kTwoPi * z));
      }
      const auto r = fundamental_solution(LinearSystem(kind, s, Eccentricity(0.0)));
      worst = std::max(worst, spectrum_mismatch(r.eigenvalues, expected));
    }
  }
  o.note << "max mismatch " << worst << ' ';
  o.require(worst <= 1e-8, "monodromy vs exp(2 pi lambda)");
}

void crit_kepler(Outcome& o) {
  for (double e : {0.0, 0.3, 0.6}) {
    const auto r = fundamental_solution(LinearSystem(BlockKind::Kepler, ShapeParam(1.0), Eccentricity(e)));
    o.require(kernel_dimension(r.M, 1.0, 1e-6) == 3, "nullity 3");
  }
}

void crit_symmetry(Outcome& o) {
  std::mt19937_64 rng(20141007);
  std::uniform_real_distribution<double> du(kInvSqrt3 + 1e-3, kSqrt3 - 1e-3), de(0.0, 0.9);
  double worst = 0.0, eta = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto s = symmetry_check(ShapeParam(du(rng)), Eccentricity(de(rng)));
    worst = std::max({worst, s.xi_spectrum_mismatch, s.eta_spectrum_mismatch});
    eta = std::max(eta, s.eta_defect);
  }
  o.note << "max mismatch " << worst << ", eta defect " << eta << ' ';
  o.require(worst <= 1e-7, "spectra of u and 1/u");
  o.require(eta <= 1e-7, "eta blocks identical");
}

void crit_rectangle(Outcome& o) {
  ScanConfig c;
  c.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto g = run_scan(c);
  o.require(g.failures.empty(), "failed grid points");
  o.require(g.rows.size() == 2u * 25u * 10u, "row count");
  std::map<std::pair<double, double>, int> pairs;
  double worst = 0.0;
  for (const auto& r : g.rows) {
    worst = std::max(worst, r.residual);
    o.require(r.classification == Classification::Hyperbolic && r.hyperbolic_pairs == 2,
              "non-hyperbolic block at u=" + std::to_string(r.u) + " e=" + std::to_string(r.e));
    o.require(r.residual <= 1e-9, "symplectic residual");
    pairs[{r.u, r.e}] += r.hyperbolic_pairs;
  }
  for (const auto& [k, n] : pairs) o.require(n == 4, "essential pairs != 4");
  o.note << "points " << pairs.size() << ", max residual " << worst << ' ';
}

void crit_positivity(Outcome& o) {
  const auto crit = find_critical_params();
  const std::vector<std::pair<std::string, OperatorFamily>> families{
      {"scriptA(1,e)", [](Eccentricity e) { return OperatorSpec::script_a(ShapeParam(1.0), e); }},
      {"scriptB(u3,e)", [&](Eccentricity e) { return OperatorSpec::script_b(ShapeParam(crit.u3), e); }},
      {"A(9,e)", [](Eccentricity e) { return OperatorSpec::a_beta(9.0, e); }},
      {"scriptA(1/sqrt3,e)", [](Eccentricity e) { return OperatorSpec::script_a(ShapeParam(kInvSqrt3), e); }},
      {"A(27/4,e)", [](Eccentricity e) { return OperatorSpec::a_beta(6.75, e); }},
  };
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& [name, make] : families) {
    for (double e : {0.0, 0.2, 0.44, 0.6, 0.9}) {
      for (double rho : {0.0, 0.5, 1.0 / 6.0}) {
        // morse_index compares N with 2N; a 4N refinement means they differed.
        const auto r = morse_index(make(Eccentricity(e)), rho, 64);
        lowest = std::min(lowest, r.min_eigenvalue);
        o.require(r.truncation == 128, name + ": N = 64 and 128 indices differ");
        o.require(r.morse_index == 0 && r.nullity == 0 && r.min_eigenvalue > 0.0,
                  name + " not positive at e=" + std::to_string(e));
      }
    }
  }
  double dev = 0.0;
  for (double e : {0.0, 0.3, 0.6, 0.9}) {
    const Eccentricity ecc(e);
    const auto a = OperatorSpec::script_a(ShapeParam(kInvSqrt3), ecc);
    const auto b = OperatorSpec::a_beta(6.75, ecc);
    const auto c = OperatorSpec::script_b(ShapeParam(crit.u3), ecc);
    const auto d = OperatorSpec::a_beta(9.0, ecc);
    dev = std::max({dev, std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(c.a - d.a), std::abs(c.b - d.b)});
  }
  o.note << "lowest eigenvalue " << lowest << ", identity deviation " << dev << ' ';
  o.require(dev <= 1e-10, "operator identities");
}

void crit_determinism(Outcome& o, const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / ("rhombus-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto run = [&](const std::string& name, int workers) {
    const fs::path out = dir / name;
    const std::string cmd = "\"" + cli + "\" scan --force --workers " + std::to_string(workers) +
                            " --output \"" + out.string() + "\"";
    const int rc = std::system(cmd.c_str());
    o.require(rc == 0, "scan exit status for " + name);
    return slurp(out);
  };
  const auto a = run("a.csv", 1);
  const auto b = run("b.csv", 1);
  const auto c = run("c.csv", 8);
  o.require(!a.empty(), "empty output");
  o.require(a == b, "two runs differ");
  o.require(a == c, "workers 1 and 8 differ");
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <rhombus_cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  criterion(1, "critical parameters", 1.0, crit_parameters);
  criterion(2, "coefficient identities", 1.0, crit_identities);
  criterion(3, "bound suite", 1.0, crit_bounds);
  criterion(4, "reduction validation", 5.0, crit_reduction);
  criterion(5, "e = 0 oracle", 10.0, crit_circular);
  criterion(6, "Kepler block nullity", 5.0, crit_kepler);
  criterion(7, "u <-> 1/u symmetry", 10.0, crit_symmetry);
  criterion(8, "hyperbolicity rectangle", 300.0, crit_rectangle);
  criterion(9, "operator positivity", 120.0, crit_positivity);
  criterion(10, "scan determinism", 0.0, [&](Outcome& o) { crit_determinism(o, cli); });
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
