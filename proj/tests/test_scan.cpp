#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rhombus/error.hpp"
#include "rhombus/scan.hpp"
#include "rhombus/verify.hpp"

using namespace rhombus;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("rhombus-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScanConfig small_config() {
  ScanConfig c;
  c.u_min = 0.9;
  c.u_max = 1.1;
  c.e_min = 0.0;
  c.e_max = 0.2;
  c.n_u = 3;
  c.n_e = 3;
  c.blocks = {BlockKind::Xi};
  return c;
}

void check_same_grid(const StabilityGrid& a, const StabilityGrid& b) {
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(a.has_indices == b.has_indices);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    CHECK(std::abs(x.u - y.u) <= 1e-15 * std::abs(x.u));
    CHECK(std::abs(x.e - y.e) <= 1e-15);
    CHECK(x.block == y.block);
    REQUIRE(x.eigenvalues.size() == y.eigenvalues.size());
    for (std::size_t k = 0; k < x.eigenvalues.size(); ++k)
      CHECK(std::abs(x.eigenvalues[k] - y.eigenvalues[k]) <= 1e-15 * std::max(1.0, std::abs(x.eigenvalues[k])));
    CHECK(x.hyperbolic_pairs == y.hyperbolic_pairs);
    CHECK(x.classification == y.classification);
    CHECK(std::abs(x.residual - y.residual) <= 1e-15 * std::abs(x.residual));
    CHECK(x.morse_index == y.morse_index);
    CHECK(x.nullity == y.nullity);
  }
}

}  // namespace

TEST_CASE("configuration text round trip and overrides") {
  ScanConfig c = parse_config(R"(
    # comment line
    u_min = 0.7
    u_max = 1.3   # trailing comment
    n_u = 4
    n_e = 2
    e_max = 0.5
    blocks = xi, full
    format = json
    indices = true
    workers = 3
  )");
  CHECK(c.u_min == 0.7);
  CHECK(c.u_max == 1.3);
  CHECK(c.n_u == 4);
  CHECK(c.blocks == std::vector<BlockKind>{BlockKind::Xi, BlockKind::Full});
  CHECK(c.format == OutputFormat::Json);
  CHECK(c.indices);
  CHECK(c.workers == 3);
  CHECK_NOTHROW(c.validate());
  const ScanConfig again = parse_config(c.to_text());
  CHECK(again.to_text() == c.to_text());
  CHECK(again.hash() == c.hash());
  // explicit set() overrides file values
  c.set("n_u", "5");
  CHECK(c.n_u == 5);
}

TEST_CASE("configuration errors") {
  auto config_error = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code() == ErrorCode::Config;
    }
    return false;
  };
  CHECK(config_error([] { parse_config("bogus = 1"); }));
  CHECK(config_error([] { parse_config("n_u = three"); }));
  CHECK(config_error([] { parse_config("no equals sign"); }));
  CHECK(config_error([] { parse_config("blocks = kepler").validate(); }));
  CHECK(config_error([] { parse_config("u_min = 0.3").validate(); }));
  CHECK(config_error([] { parse_config("e_max = 0.995").validate(); }));
  CHECK(config_error([] { parse_config("n_e = 1").validate(); }));
  CHECK(config_error([] { parse_config("u_min = 1.2\nu_max = 1.0").validate(); }));
  CHECK(config_error([] { parse_config("format = xml"); }));
  CHECK(config_error([] { parse_config("workers = 0").validate(); }));
  CHECK(config_error([] { load_config("/nonexistent/rhombus.cfg"); }));
}

TEST_CASE("hash ignores presentation-only fields") {
  ScanConfig a = small_config(), b = small_config();
  b.output = "elsewhere.csv";
  b.workers = 8;
  b.format = OutputFormat::Json;
  b.cache_dir = "/tmp/x";
  CHECK(a.hash() == b.hash());
  b.n_e = 4;
  CHECK(a.hash() != b.hash());
  b = small_config();
  b.rtol = 1e-14;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("linspace includes both endpoints") {
  const auto v = linspace(kInvSqrt3, kSqrt3, 25);
  CHECK(v.front() == kInvSqrt3);
  CHECK(v.back() == kSqrt3);
  CHECK(v.size() == 25);
  CHECK(linspace(0.0, 0.0, 2) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("small scan near u = 1") {
  const auto g = run_scan(small_config());
  CHECK(g.failures.empty());
  REQUIRE(g.rows.size() == 9);
  for (const auto& r : g.rows) {
    CHECK(r.classification == Classification::Hyperbolic);
    CHECK(r.hyperbolic_pairs == 2);
    CHECK(r.residual <= 1e-9);
    CHECK(spectral_symmetry_defect(r.eigenvalues) <= 1e-7);
  }
  // row-major in u then e
  CHECK(g.rows[0].u == 0.9);
  CHECK(g.rows[1].u == 0.9);
  CHECK(g.rows[1].e == doctest::Approx(0.1));
  CHECK(g.rows[3].u == doctest::Approx(1.0));
}

TEST_CASE("circular scan reproduces the autonomous spectrum") {
  ScanConfig c;
  c.u_min = 0.7;
  c.u_max = 1.4;
  c.e_min = c.e_max = 0.0;
  c.n_u = c.n_e = 2;
  c.blocks = {BlockKind::Xi, BlockKind::Eta};
  const auto g = run_scan(c);
  REQUIRE(g.rows.size() == 8);
  for (const auto& r : g.rows) {
    const auto a = autonomous_spectrum(ShapeParam(r.u));
    const auto& roots = r.block == BlockKind::Xi ? a.p2_roots : a.p3_roots;
    std::vector<std::complex<double>> expected;
    for (const auto& z : roots) expected.push_back(std::exp(kTwoPi * z));
    CHECK(spectrum_mismatch(r.eigenvalues, expected) < 1e-8);
  }
}

TEST_CASE("worker count does not change the output") {
  ScanConfig c = small_config();
  c.blocks = {BlockKind::Xi, BlockKind::Eta, BlockKind::Full};
  c.n_u = 3;
  c.n_e = 2;
  c.workers = 1;
  const auto serial = to_csv(run_scan(c));
  c.workers = 4;
  const auto parallel = to_csv(run_scan(c));
  CHECK(serial == parallel);
  CHECK(serial == to_csv(run_scan(c)));
}

TEST_CASE("CSV layout") {
  StabilityGrid empty;
  const auto header_only = to_csv(empty);
  CHECK(header_only ==
        "u,e,block,re_lambda_1,im_lambda_1,re_lambda_2,im_lambda_2,re_lambda_3,im_lambda_3,"
        "re_lambda_4,im_lambda_4,hyperbolic_pairs,classification,residual\n");
  CHECK(parse_csv(header_only).rows.empty());

  StabilityGrid one;
  one.rows.push_back({0.1, 0.2, BlockKind::Xi, {{2.0, 0.0}, {0.5, 0.0}, {0.0, 3.0}, {0.0, -1.0 / 3.0}},
                      2, Classification::Hyperbolic, 1e-12, std::nullopt, std::nullopt});
  const auto text = to_csv(one);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find("0.10000000000000001,0.20000000000000001,xi,2,0,0.5,0,0,3,") != std::string::npos);
}

TEST_CASE("CSV and JSON round trips") {
  ScanConfig c = small_config();
  c.n_u = 2;
  c.n_e = 2;
  c.blocks = {BlockKind::Xi, BlockKind::Full};
  c.indices = true;
  c.index_N = 16;
  const auto g = run_scan(c);
  REQUIRE(g.rows.size() == 8);
  for (const auto& r : g.rows) {
    REQUIRE(r.morse_index.has_value());
    CHECK(*r.morse_index == 0);
    CHECK(*r.nullity == 0);
  }
  check_same_grid(g, parse_csv(to_csv(g)));
  check_same_grid(g, parse_json(to_json(g)));
  CHECK(to_csv(parse_csv(to_csv(g))) == to_csv(g));
  CHECK(to_json(parse_json(to_json(g))) == to_json(g));
  CHECK_THROWS_AS(parse_csv("nonsense\n"), Error);
  CHECK_THROWS_AS(parse_json("{"), Error);
}

TEST_CASE("atomic write and cache") {
  const auto dir = fresh_dir("cache");
  ScanConfig c = small_config();
  c.n_u = 2;
  c.n_e = 2;
  c.cache_dir = dir.string();
  const auto first = run_scan_cached(c, false);
  CHECK_FALSE(first.from_cache);
  const auto second = run_scan_cached(c, false);
  CHECK(second.from_cache);
  CHECK(to_csv(first) == to_csv(second));
  const auto forced = run_scan_cached(c, true);
  CHECK_FALSE(forced.from_cache);

  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++entries;
    CHECK(e.path().filename().string().rfind("scan-", 0) == 0);
    CHECK(e.path().extension() == ".csv");
  }
  CHECK(entries == 1);

  const auto out = dir / "grid.json";
  write_output(first, OutputFormat::Json, out);
  CHECK(slurp(out) == to_json(first));
  CHECK_THROWS_AS(write_output(first, OutputFormat::Csv, dir / "missing" / "x.csv"), Error);
  fs::remove_all(dir);
}

TEST_CASE("environment variable selects the cache directory") {
  const auto dir = fresh_dir("env");
  ::setenv(kOutputDirEnv, dir.string().c_str(), 1);
  ScanConfig c;
  CHECK(c.resolved_cache_dir() == dir);
  c.cache_dir = "/somewhere/else";
  CHECK(c.resolved_cache_dir() == fs::path("/somewhere/else"));
  ::unsetenv(kOutputDirEnv);
  CHECK(ScanConfig{}.resolved_cache_dir().empty());
  fs::remove_all(dir);
}

TEST_CASE("failed points are reported, not thrown") {
  ScanConfig c = small_config();
  c.n_u = 2;
  c.n_e = 2;
  c.residual_budget = 1e-30;
  const auto g = run_scan(c);
  CHECK(g.rows.empty());
  REQUIRE(g.failures.size() == 4);
  CHECK(g.failures[0].message.find("residual") != std::string::npos);
  const auto js = to_json(g);
  CHECK(parse_json(js).failures.size() == 4);
}

TEST_CASE("verification checklist on a reduced grid") {
  VerifyOptions o;
  o.scan.n_u = 5;
  o.scan.n_e = 3;
  o.index_N = 32;
  const auto r = verify_claims(o);
  REQUIRE(r.items.size() == 7);
  for (const auto& item : r.items) {
    INFO(item.id << ": " << item.measured);
    CHECK(item.passed);
  }
  CHECK(r.all_passed());
  CHECK(to_json(r).find("\"all_passed\": true") != std::string::npos);
  CHECK(to_text(r).find("(g) PASS") != std::string::npos);
}
