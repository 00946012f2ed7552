#include "rhombus/rhombus.h"

#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rhombus/central_config.hpp"
#include "rhombus/error.hpp"
#include "rhombus/monodromy.hpp"
#include "rhombus/reduced_coeffs.hpp"
#include "rhombus/scan.hpp"
#include "rhombus/spectral_index.hpp"
#include "rhombus/verify.hpp"

struct rhb_monodromy {
  rhombus::MonodromyResult result;
};

struct rhb_scan_config {
  rhombus::ScanConfig config;
};

struct rhb_grid {
  rhombus::StabilityGrid grid;
};

struct rhb_report {
  rhombus::VerifyReport report;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

rhb_status status_of(rhombus::ErrorCode code) {
  using rhombus::ErrorCode;
  switch (code) {
    case ErrorCode::Domain: return RHB_ERR_DOMAIN;
    case ErrorCode::SingularConfiguration: return RHB_ERR_SINGULAR;
    case ErrorCode::StepSize: return RHB_ERR_STEP_SIZE;
    case ErrorCode::ToleranceNotMet: return RHB_ERR_TOLERANCE;
    case ErrorCode::StepFailure: return RHB_ERR_STEP_FAILURE;
    case ErrorCode::Bracketing: return RHB_ERR_BRACKETING;
    case ErrorCode::NonConvergence: return RHB_ERR_NONCONVERGENCE;
    case ErrorCode::Io: return RHB_ERR_IO;
    case ErrorCode::Config: return RHB_ERR_CONFIG;
  }
  return RHB_ERR_INTERNAL;
}

template <class F>
rhb_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return RHB_OK;
  } catch (const rhombus::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RHB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RHB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RHB_ERR_INTERNAL;
  }
}

rhb_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return RHB_ERR_NULL_ARGUMENT;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json complex_list(const std::vector<std::complex<double>>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

json critical_json(const rhombus::CriticalParams& c) {
  return {{"u1", c.u1},
          {"u2", c.u2},
          {"u3", c.u3},
          {"u3_bar", c.u3_bar},
          {"u3_bar_minus_u3", c.u3_bar - c.u3},
          {"beta1", c.beta1},
          {"phi_diff_u1", c.phi_diff_u1},
          {"phi_sum_u1", c.phi_sum_u1},
          {"psi_prod_u3", c.psi_prod_u3},
          {"max_residual", c.max_residual},
          {"e_star_27_4", c.e_star_27_4},
          {"e_star_beta1", c.e_star_beta1}};
}

rhombus::OperatorSpec make_operator(const char* op, double param, double e) {
  using rhombus::OperatorKind;
  using rhombus::OperatorSpec;
  const rhombus::Eccentricity ecc(e);
  switch (rhombus::parse_operator(op)) {
    case OperatorKind::ScriptA: return OperatorSpec::script_a(rhombus::ShapeParam(param), ecc);
    case OperatorKind::ScriptB: return OperatorSpec::script_b(rhombus::ShapeParam(param), ecc);
    case OperatorKind::ABeta: return OperatorSpec::a_beta(param, ecc);
    case OperatorKind::ScriptABar:
      return OperatorSpec::script_a_bar(rhombus::ShapeParam(param), ecc);
  }
  rhombus::fail(rhombus::ErrorCode::Config, "unknown operator");
}

rhombus::IndexResult run_index(const char* op, double param, double e,
                               double rho, int N, double zero_tol) {
  const auto spec = make_operator(op, param, e);
  if (N <= 0) N = rhombus::default_truncation(e);
  return rhombus::morse_index(spec, rho, N, zero_tol);
}

}  // namespace

extern "C" {

const char* rhb_last_error(void) { return g_last_error.c_str(); }

const char* rhb_status_name(rhb_status status) {
  switch (status) {
    case RHB_OK: return "ok";
    case RHB_ERR_DOMAIN: return "domain error";
    case RHB_ERR_SINGULAR: return "singular configuration";
    case RHB_ERR_STEP_SIZE: return "invalid step size";
    case RHB_ERR_TOLERANCE: return "tolerance not met";
    case RHB_ERR_STEP_FAILURE: return "step failure";
    case RHB_ERR_BRACKETING: return "bracketing error";
    case RHB_ERR_NONCONVERGENCE: return "non-convergence";
    case RHB_ERR_IO: return "I/O error";
    case RHB_ERR_CONFIG: return "configuration error";
    case RHB_ERR_NULL_ARGUMENT: return "null argument";
    case RHB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rhb_version(void) { return "1.0.0"; }

void rhb_string_free(char* s) { std::free(s); }

rhb_status rhb_coefficients_at(double u, rhb_coefficients* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    const auto c = rhombus::reduced_coefficients(rhombus::ShapeParam(u));
    *out = {c.u, c.phi1, c.phi2, c.psi1, c.psi2, c.dphi_diff, c.dpsi_diff};
  });
}

rhb_status rhb_critical(double tol, rhb_critical_params* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    const auto c = rhombus::find_critical_params(tol);
    *out = {c.u1, c.u2, c.u3, c.u3_bar, c.beta1, c.phi_diff_u1, c.phi_sum_u1,
            c.psi_prod_u3, c.max_residual, c.e_star_27_4, c.e_star_beta1};
  });
}

rhb_status rhb_coefficients_json(double u, double e, char** out_json) {
  if (!out_json) return null_arg("out_json");
  return guard([&] {
    const rhombus::ShapeParam up(u);
    const rhombus::Eccentricity ec(e);
    const auto c = rhombus::reduced_coefficients(up);
    const auto d = rhombus::coefficient_derivatives(up);
    const auto km = rhombus::coefficient_matrices(up, ec, 0.0);
    const auto s = rhombus::autonomous_spectrum(up);
    json doc = {
        {"u", c.u},
        {"e", e},
        {"phi", {c.phi1, c.phi2}},
        {"psi", {c.psi1, c.psi2}},
        {"derivatives",
         {{"phi2_minus_phi1", d.phi_diff},
          {"psi1_minus_psi2", d.psi_diff},
          {"phi1_phi2", d.phi_prod},
          {"psi1_psi2", d.psi_prod},
          {"four_minus_phi_sum", d.phi_trace}}},
        {"K_at_t0", matrix_json(km.K)},
        {"T_at_t0", matrix_json(km.T)},
        {"p2", {{"trace_coeff", s.p2_trace}, {"const_coeff", s.p2_det},
                {"roots", complex_list({s.p2_roots.begin(), s.p2_roots.end()})}}},
        {"p3", {{"trace_coeff", s.p3_trace}, {"const_coeff", s.p3_det},
                {"roots", complex_list({s.p3_roots.begin(), s.p3_roots.end()})}}},
        {"critical", critical_json(rhombus::find_critical_params())}};
    *out_json = dup(doc.dump(2));
  });
}

rhb_status rhb_configuration_json(double u, char** out_json) {
  if (!out_json) return null_arg("out_json");
  return guard([&] {
    const rhombus::ShapeParam up(u);
    json doc = {{"u", u}, {"mass_ratio", rhombus::mass_ratio(up)}};
    if (!up.is_lower_endpoint()) {
      const auto cfg = rhombus::build_configuration(up);
      json pos = json::array();
      for (const auto& p : cfg.positions) pos.push_back({p.x(), p.y()});
      doc["alpha"] = cfg.alpha;
      doc["mu"] = cfg.mu_potential;
      doc["masses"] = cfg.masses();
      doc["positions"] = pos;
      doc["configuration_residual"] = rhombus::configuration_residual(cfg);
      const auto h = rhombus::hessian_blocks(up);
      doc["hessian"] = matrix_json(h.dense());
      doc["hessian_row_sum_defect"] = h.row_sum_defect();
    }
    if (!up.is_endpoint()) {
      const auto a = rhombus::reduction_matrix(up);
      doc["reduction_matrix"] = matrix_json(a.A);
      doc["orthonormality_defect"] = a.orthonormality_defect();
      doc["commutation_defect"] = a.commutation_defect();
      doc["reduced_hessian"] = matrix_json(rhombus::reduced_hessian_closed_form(up));
    }
    *out_json = dup(doc.dump(2));
  });
}

rhb_status rhb_monodromy_compute(const char* block, double u, double e,
                                 double rtol, double atol, rhb_monodromy** out) {
  if (!block) return null_arg("block");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    rhombus::IntegrationOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    const rhombus::LinearSystem sys(rhombus::parse_block(block), rhombus::ShapeParam(u),
                                    rhombus::Eccentricity(e));
    auto* m = new rhb_monodromy{rhombus::fundamental_solution(sys, opts)};
    *out = m;
  });
}

void rhb_monodromy_free(rhb_monodromy* m) { delete m; }

int rhb_monodromy_dimension(const rhb_monodromy* m) {
  return m ? static_cast<int>(m->result.M.rows()) : 0;
}

rhb_status rhb_monodromy_matrix(const rhb_monodromy* m, double* out) {
  if (!m) return null_arg("m");
  if (!out) return null_arg("out");
  const auto& M = m->result.M;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[i * M.cols() + j] = M(i, j);
  return RHB_OK;
}

rhb_status rhb_monodromy_eigenvalues(const rhb_monodromy* m, double* re, double* im) {
  if (!m) return null_arg("m");
  if (!re || !im) return null_arg("re/im");
  const auto& v = m->result.eigenvalues;
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return RHB_OK;
}

double rhb_monodromy_residual(const rhb_monodromy* m) {
  return m ? m->result.symplectic_residual : -1.0;
}

int rhb_monodromy_hyperbolic_pairs(const rhb_monodromy* m) {
  return m ? m->result.hyperbolic_pairs : -1;
}

const char* rhb_monodromy_classification(const rhb_monodromy* m) {
  if (!m) return "";
  return rhombus::to_string(m->result.classification).data();
}

rhb_status rhb_monodromy_kernel_dimension(const rhb_monodromy* m, double omega_re,
                                          double omega_im, double tol, int* out) {
  if (!m) return null_arg("m");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = rhombus::kernel_dimension(m->result.M, {omega_re, omega_im}, tol);
  });
}

rhb_status rhb_monodromy_to_json(const rhb_monodromy* m, char** out_json) {
  if (!m) return null_arg("m");
  if (!out_json) return null_arg("out_json");
  return guard([&] {
    const auto& r = m->result;
    json doc = {{"block", std::string(rhombus::to_string(r.kind))},
                {"u", r.u},
                {"e", r.e},
                {"dimension", r.M.rows()},
                {"M", matrix_json(r.M)},
                {"eigenvalues", complex_list(r.eigenvalues)},
                {"moduli", json::array()},
                {"symplectic_residual", r.symplectic_residual},
                {"checkpoint_residual", r.checkpoint_residual},
                {"determinant", r.determinant},
                {"classification", std::string(rhombus::to_string(r.classification))},
                {"hyperbolic_pairs", r.hyperbolic_pairs},
                {"steps", r.steps}};
    for (const auto& z : r.eigenvalues) doc["moduli"].push_back(std::abs(z));
    if (r.kind == rhombus::BlockKind::Full)
      doc["essential_eigenvalues"] = complex_list(r.essential_eigenvalues);
    *out_json = dup(doc.dump(2));
  });
}

rhb_status rhb_morse_index(const char* op, double param, double e, double rho,
                           int N, double zero_tol, rhb_index_result* out) {
  if (!op) return null_arg("op");
  if (!out) return null_arg("out");
  return guard([&] {
    const auto r = run_index(op, param, e, rho, N, zero_tol);
    *out = {r.omega.real(), r.omega.imag(), r.rho, r.morse_index, r.nullity,
            r.min_eigenvalue, r.truncation, r.converged ? 1 : 0};
  });
}

rhb_status rhb_index_json(const char* op, double param, double e, double rho,
                          int N, double zero_tol, char** out_json) {
  if (!op) return null_arg("op");
  if (!out_json) return null_arg("out_json");
  return guard([&] {
    const auto r = run_index(op, param, e, rho, N, zero_tol);
    json doc = {{"operator", op},
                {"param", param},
                {"e", e},
                {"rho", r.rho},
                {"omega", {r.omega.real(), r.omega.imag()}},
                {"morse_index", r.morse_index},
                {"nullity", r.nullity},
                {"min_eigenvalue", r.min_eigenvalue},
                {"truncation", r.truncation},
                {"converged", r.converged}};
    *out_json = dup(doc.dump(2));
  });
}

rhb_status rhb_scan_config_new(rhb_scan_config** out) {
  if (!out) return null_arg("out");
  return guard([&] { *out = new rhb_scan_config{}; });
}

void rhb_scan_config_free(rhb_scan_config* c) { delete c; }

rhb_status rhb_scan_config_load(rhb_scan_config* c, const char* path) {
  if (!c) return null_arg("c");
  if (!path) return null_arg("path");
  return guard([&] { c->config = rhombus::load_config(path, c->config); });
}

rhb_status rhb_scan_config_set(rhb_scan_config* c, const char* key, const char* value) {
  if (!c) return null_arg("c");
  if (!key || !value) return null_arg("key/value");
  return guard([&] { c->config.set(key, value); });
}

rhb_status rhb_scan_config_validate(const rhb_scan_config* c) {
  if (!c) return null_arg("c");
  return guard([&] { c->config.validate(); });
}

rhb_status rhb_scan_config_to_text(const rhb_scan_config* c, char** out_text) {
  if (!c) return null_arg("c");
  if (!out_text) return null_arg("out_text");
  return guard([&] { *out_text = dup(c->config.to_text()); });
}

rhb_status rhb_scan_config_get(const rhb_scan_config* c, const char* key, char** out_value) {
  if (!c) return null_arg("c");
  if (!key || !out_value) return null_arg("key/out_value");
  return guard([&] {
    std::istringstream in(c->config.to_text());
    std::string line;
    const std::string prefix = std::string(key) + " = ";
    while (std::getline(in, line)) {
      if (line.rfind(prefix, 0) == 0) {
        *out_value = dup(line.substr(prefix.size()));
        return;
      }
    }
    rhombus::fail(rhombus::ErrorCode::Config, "unknown configuration key '" + std::string(key) + "'");
  });
}

rhb_status rhb_scan_run(const rhb_scan_config* c, int force, rhb_grid** out) {
  if (!c) return null_arg("c");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    *out = new rhb_grid{rhombus::run_scan_cached(c->config, force != 0)};
  });
}

void rhb_grid_free(rhb_grid* g) { delete g; }

size_t rhb_grid_row_count(const rhb_grid* g) { return g ? g->grid.rows.size() : 0; }

size_t rhb_grid_failure_count(const rhb_grid* g) {
  return g ? g->grid.failures.size() : 0;
}

int rhb_grid_from_cache(const rhb_grid* g) { return g && g->grid.from_cache ? 1 : 0; }

rhb_status rhb_grid_failure(const rhb_grid* g, size_t i, char** out_message) {
  if (!g) return null_arg("g");
  if (!out_message) return null_arg("out_message");
  return guard([&] {
    if (i >= g->grid.failures.size())
      rhombus::fail(rhombus::ErrorCode::Domain, "failure index out of range");
    const auto& f = g->grid.failures[i];
    std::ostringstream os;
    os.precision(17);
    os << "u=" << f.u << " e=" << f.e << " block=" << rhombus::to_string(f.block)
       << ": " << f.message;
    *out_message = dup(os.str());
  });
}

rhb_status rhb_grid_serialize(const rhb_grid* g, const char* format, char** out_text) {
  if (!g) return null_arg("g");
  if (!format || !out_text) return null_arg("format/out_text");
  return guard([&] {
    *out_text = dup(rhombus::serialize(g->grid, rhombus::parse_format(format)));
  });
}

rhb_status rhb_grid_write(const rhb_grid* g, const char* format, const char* path) {
  if (!g) return null_arg("g");
  if (!format || !path) return null_arg("format/path");
  return guard([&] {
    rhombus::write_output(g->grid, rhombus::parse_format(format), path);
  });
}

rhb_status rhb_verify_run(const rhb_scan_config* c, int force, int index_N,
                          rhb_report** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    rhombus::VerifyOptions opts;
    if (c) opts.scan = c->config;
    opts.force = force != 0;
    if (index_N > 0) opts.index_N = index_N;
    *out = new rhb_report{rhombus::verify_claims(opts)};
  });
}

void rhb_report_free(rhb_report* r) { delete r; }

size_t rhb_report_item_count(const rhb_report* r) { return r ? r->report.items.size() : 0; }

int rhb_report_item_passed(const rhb_report* r, size_t i) {
  if (!r || i >= r->report.items.size()) return 0;
  return r->report.items[i].passed ? 1 : 0;
}

int rhb_report_all_passed(const rhb_report* r) { return r && r->report.all_passed() ? 1 : 0; }

rhb_status rhb_report_to_json(const rhb_report* r, char** out_json) {
  if (!r) return null_arg("r");
  if (!out_json) return null_arg("out_json");
  return guard([&] { *out_json = dup(rhombus::to_json(r->report)); });
}

rhb_status rhb_report_to_text(const rhb_report* r, char** out_text) {
  if (!r) return null_arg("r");
  if (!out_text) return null_arg("out_text");
  return guard([&] { *out_text = dup(rhombus::to_text(r->report)); });
}

}  // extern "C"
