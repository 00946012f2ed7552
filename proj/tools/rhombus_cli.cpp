// Command-line front end over the C interface.
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rhombus/rhombus.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitClaimFailed = 1;
constexpr int kExitConfig = 2;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { rhb_string_free(p); }
};

int report(rhb_status st) {
  std::fprintf(stderr, "error (%s): %s\n", rhb_status_name(st), rhb_last_error());
  switch (st) {
    case RHB_ERR_DOMAIN:
    case RHB_ERR_CONFIG:
    case RHB_ERR_NULL_ARGUMENT:
    case RHB_ERR_SINGULAR:
      return kExitConfig;
    default:
      return kExitClaimFailed;
  }
}

int print_owned(rhb_status st, OwnedString& s) {
  if (st != RHB_OK) return report(st);
  std::fputs(s.p, stdout);
  std::fputc('\n', stdout);
  return kExitOk;
}

struct ScanFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::string> output, format, blocks, cache_dir;
  std::optional<int> workers, n_u, n_e;
  std::optional<double> u_min, u_max, e_min, e_max, rtol;
  bool indices = false;
  bool force = false;
};

void add_scan_flags(CLI::App* cmd, ScanFlags& f) {
  cmd->add_option("--config", f.config_file, "flat key = value configuration file");
  cmd->add_option("--set", f.sets, "override a configuration key (key=value); repeatable");
  cmd->add_option("--output", f.output, "output file (default: standard output)");
  cmd->add_option("--format", f.format, "csv or json");
  cmd->add_option("--blocks", f.blocks, "comma-separated subset of xi,eta,full");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--n-u", f.n_u, "grid points in u");
  cmd->add_option("--n-e", f.n_e, "grid points in e");
  cmd->add_option("--u-min", f.u_min);
  cmd->add_option("--u-max", f.u_max);
  cmd->add_option("--e-min", f.e_min);
  cmd->add_option("--e-max", f.e_max);
  cmd->add_option("--rtol", f.rtol, "integration tolerance (rtol = atol)");
  cmd->add_option("--cache-dir", f.cache_dir, "scan cache directory");
  cmd->add_flag("--indices", f.indices, "add Morse index and nullity at omega = 1");
  cmd->add_flag("--force", f.force, "ignore cached results");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Builds the scan configuration: file first, then explicit flags.
rhb_status build_config(const ScanFlags& f, rhb_scan_config** out) {
  rhb_status st = rhb_scan_config_new(out);
  if (st != RHB_OK) return st;
  rhb_scan_config* c = *out;
  if (!f.config_file.empty() && (st = rhb_scan_config_load(c, f.config_file.c_str())) != RHB_OK)
    return st;
  auto set = [&](const char* k, const std::string& v) {
    if (st == RHB_OK) st = rhb_scan_config_set(c, k, v.c_str());
  };
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "--set expects key=value, got '%s'\n", kv.c_str());
      return RHB_ERR_CONFIG;
    }
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  if (f.output) set("output", *f.output);
  if (f.format) set("format", *f.format);
  if (f.blocks) set("blocks", *f.blocks);
  if (f.cache_dir) set("cache_dir", *f.cache_dir);
  if (f.workers) set("workers", std::to_string(*f.workers));
  if (f.n_u) set("n_u", std::to_string(*f.n_u));
  if (f.n_e) set("n_e", std::to_string(*f.n_e));
  if (f.u_min) set("u_min", num(*f.u_min));
  if (f.u_max) set("u_max", num(*f.u_max));
  if (f.e_min) set("e_min", num(*f.e_min));
  if (f.e_max) set("e_max", num(*f.e_max));
  if (f.rtol) {
    set("rtol", num(*f.rtol));
    set("atol", num(*f.rtol));
  }
  if (f.indices) set("indices", "true");
  if (st == RHB_OK) st = rhb_scan_config_validate(c);
  return st;
}

std::string config_value(const rhb_scan_config* c, const char* key) {
  OwnedString s;
  if (rhb_scan_config_get(c, key, &s.p) != RHB_OK) return {};
  return s.p;
}

int run_scan(const ScanFlags& f) {
  rhb_scan_config* cfg = nullptr;
  rhb_status st = build_config(f, &cfg);
  if (st != RHB_OK) {
    rhb_scan_config_free(cfg);
    return report(st == RHB_ERR_CONFIG || st == RHB_ERR_DOMAIN ? RHB_ERR_CONFIG : st);
  }
  rhb_grid* grid = nullptr;
  st = rhb_scan_run(cfg, f.force ? 1 : 0, &grid);
  if (st != RHB_OK) {
    rhb_scan_config_free(cfg);
    return report(st);
  }
  const std::string output = config_value(cfg, "output");
  const std::string format = config_value(cfg, "format");
  int code = kExitOk;
  if (output.empty()) {
    OwnedString text;
    st = rhb_grid_serialize(grid, format.c_str(), &text.p);
    if (st == RHB_OK) std::fputs(text.p, stdout);
  } else {
    st = rhb_grid_write(grid, format.c_str(), output.c_str());
  }
  if (st != RHB_OK) code = report(st);
  const size_t failures = rhb_grid_failure_count(grid);
  for (size_t i = 0; i < failures; ++i) {
    OwnedString msg;
    if (rhb_grid_failure(grid, i, &msg.p) == RHB_OK)
      std::fprintf(stderr, "failed point: %s\n", msg.p);
  }
  if (failures > 0 && code == kExitOk) code = kExitClaimFailed;
  if (rhb_grid_from_cache(grid)) std::fprintf(stderr, "scan result served from cache\n");
  rhb_grid_free(grid);
  rhb_scan_config_free(cfg);
  return code;
}

int run_verify(const ScanFlags& f, int index_N, bool as_json) {
  rhb_scan_config* cfg = nullptr;
  rhb_status st = build_config(f, &cfg);
  if (st != RHB_OK) {
    rhb_scan_config_free(cfg);
    return report(RHB_ERR_CONFIG);
  }
  rhb_report* rep = nullptr;
  st = rhb_verify_run(cfg, f.force ? 1 : 0, index_N, &rep);
  rhb_scan_config_free(cfg);
  if (st != RHB_OK) return report(st);
  OwnedString text;
  st = as_json ? rhb_report_to_json(rep, &text.p) : rhb_report_to_text(rep, &text.p);
  if (st == RHB_OK) std::fputs(text.p, stdout);
  const int code = rhb_report_all_passed(rep) ? kExitOk : kExitClaimFailed;
  rhb_report_free(rep);
  return st == RHB_OK ? code : report(st);
}

int run_coeffs(double u, double e, bool as_json) {
  OwnedString js;
  if (as_json) return print_owned(rhb_coefficients_json(u, e, &js.p), js);
  rhb_coefficients c;
  rhb_status st = rhb_coefficients_at(u, &c);
  if (st != RHB_OK) return report(st);
  rhb_critical_params k;
  st = rhb_critical(1e-12, &k);
  if (st != RHB_OK) return report(st);
  std::printf("u                 %.17g\n", c.u);
  std::printf("phi1, phi2        %.17g  %.17g\n", c.phi1, c.phi2);
  std::printf("psi1, psi2        %.17g  %.17g\n", c.psi1, c.psi2);
  std::printf("d(phi2-phi1)/du   %.17g\n", c.dphi_diff);
  std::printf("d(psi1-psi2)/du   %.17g\n", c.dpsi_diff);
  std::printf("e                 %.17g  (K, T scale as 1/(1 + e cos t))\n", e);
  std::printf("u1 = %.12f  u2 = %.12f  u3 = %.12f  u3_bar = %.12f\n", k.u1, k.u2, k.u3, k.u3_bar);
  std::printf("beta1 = %.10f  phi1-phi2(u1) = %.10f  phi1+phi2(u1) = %.10f\n", k.beta1,
              k.phi_diff_u1, k.phi_sum_u1);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear stability of elliptic rhombus solutions of the planar four-body problem"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rhb_version());

  // config
  ScanFlags config_flags;
  std::optional<double> config_u;
  auto* config_cmd = app.add_subcommand(
      "config", "print the effective scan configuration, or the central configuration at --u");
  add_scan_flags(config_cmd, config_flags);
  config_cmd->add_option("--u", config_u, "dump masses, Hessian and reduction matrix at u");

  // coeffs
  double coeff_u = 1.0, coeff_e = 0.0;
  bool coeff_json = false;
  auto* coeffs_cmd = app.add_subcommand("coeffs", "reduced coefficients and critical parameters");
  coeffs_cmd->add_option("--u", coeff_u, "shape parameter")->required();
  coeffs_cmd->add_option("--e", coeff_e, "eccentricity");
  coeffs_cmd->add_flag("--json", coeff_json, "JSON output");

  // monodromy
  double mono_u = 1.0, mono_e = 0.0, mono_rtol = 1e-16;
  std::optional<double> mono_atol;
  std::string mono_block = "xi";
  auto* mono_cmd = app.add_subcommand("monodromy", "monodromy matrix, spectrum and classification");
  mono_cmd->add_option("--u", mono_u)->required();
  mono_cmd->add_option("--e", mono_e)->required();
  mono_cmd->add_option("--block", mono_block, "kepler, xi, eta or full");
  mono_cmd->add_option("--rtol", mono_rtol, "relative tolerance");
  mono_cmd->add_option("--atol", mono_atol, "absolute tolerance (default: rtol)");

  // index
  std::string idx_op = "scriptA";
  std::optional<double> idx_u, idx_beta;
  double idx_e = 0.0, idx_rho = 0.0, idx_zero_tol = 1e-8;
  int idx_N = 0;
  auto* index_cmd = app.add_subcommand("index", "omega-Morse index and nullity");
  index_cmd->add_option("--op", idx_op, "scriptA, scriptB, Abeta or scriptAbar");
  index_cmd->add_option("--u", idx_u, "shape parameter (script operators)");
  index_cmd->add_option("--beta", idx_beta, "beta in [0, 9] (Abeta)");
  index_cmd->add_option("--e", idx_e, "eccentricity");
  index_cmd->add_option("--omega", idx_rho, "rho in [0, 1); omega = exp(2 pi i rho)");
  index_cmd->add_option("--N", idx_N, "Fourier truncation (default depends on e)");
  index_cmd->add_option("--zero-tol", idx_zero_tol, "relative zero threshold");

  // scan
  ScanFlags scan_flags;
  auto* scan_cmd = app.add_subcommand("scan", "parameter-rectangle sweep");
  add_scan_flags(scan_cmd, scan_flags);

  // verify
  ScanFlags verify_flags;
  int verify_N = 64;
  bool verify_json = false;
  auto* verify_cmd = app.add_subcommand("verify", "run the claim checklist");
  add_scan_flags(verify_cmd, verify_flags);
  verify_cmd->add_option("--N", verify_N, "Fourier truncation for operator checks");
  verify_cmd->add_flag("--json", verify_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*config_cmd) {
    if (config_u) {
      OwnedString js;
      return print_owned(rhb_configuration_json(*config_u, &js.p), js);
    }
    rhb_scan_config* cfg = nullptr;
    rhb_status st = build_config(config_flags, &cfg);
    int code = kExitOk;
    if (st != RHB_OK) {
      code = report(RHB_ERR_CONFIG);
    } else {
      OwnedString text;
      st = rhb_scan_config_to_text(cfg, &text.p);
      if (st == RHB_OK) std::fputs(text.p, stdout);
      else code = report(st);
    }
    rhb_scan_config_free(cfg);
    return code;
  }
  if (*coeffs_cmd) return run_coeffs(coeff_u, coeff_e, coeff_json);
  if (*mono_cmd) {
    rhb_monodromy* m = nullptr;
    rhb_status st = rhb_monodromy_compute(mono_block.c_str(), mono_u, mono_e, mono_rtol,
                                          mono_atol.value_or(mono_rtol), &m);
    if (st != RHB_OK) return report(st);
    OwnedString js;
    const int code = print_owned(rhb_monodromy_to_json(m, &js.p), js);
    rhb_monodromy_free(m);
    return code;
  }
  if (*index_cmd) {
    const bool beta_op = idx_op == "Abeta";
    if (beta_op ? !idx_beta : !idx_u) {
      std::fprintf(stderr, "error: --%s is required for --op %s\n", beta_op ? "beta" : "u",
                   idx_op.c_str());
      return kExitConfig;
    }
    const double param = beta_op ? *idx_beta : *idx_u;
    OwnedString js;
    return print_owned(
        rhb_index_json(idx_op.c_str(), param, idx_e, idx_rho, idx_N, idx_zero_tol, &js.p), js);
  }
  if (*scan_cmd) return run_scan(scan_flags);
  if (*verify_cmd) return run_verify(verify_flags, verify_N, verify_json);
  return kExitConfig;
}
