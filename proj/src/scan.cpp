#include "rhombus/scan.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rhombus/error.hpp"
#include "rhombus/spectral_index.hpp"

namespace rhombus {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    fail(ErrorCode::Config, "invalid number '" + t + "' for " + std::string(key));
  }
  return v;
}

int to_int(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    fail(ErrorCode::Config, "invalid integer '" + t + "' for " + std::string(key));
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  fail(ErrorCode::Config, "invalid boolean '" + t + "' for " + std::string(key));
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string blocks_text(const std::vector<BlockKind>& blocks) {
  std::string s;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) s += ',';
    s += to_string(blocks[i]);
  }
  return s;
}

bool in_range(double x, double lo, double hi) {
  return x >= lo - 8 * std::numeric_limits<double>::epsilon() * hi &&
         x <= hi + 8 * std::numeric_limits<double>::epsilon() * hi;
}

// Morse index and nullity at omega = 1 of the operator(s) matching a block.
std::pair<int, int> row_indices(BlockKind block, ShapeParam u, Eccentricity e,
                                int N) {
  int morse = 0, nullity = 0;
  auto add = [&](const OperatorSpec& spec) {
    const auto r = morse_index(spec, 0.0, N);
    morse += r.morse_index;
    nullity += r.nullity;
  };
  if (block == BlockKind::Xi || block == BlockKind::Full) add(OperatorSpec::script_a(u, e));
  if (block == BlockKind::Eta || block == BlockKind::Full) add(OperatorSpec::script_b(u, e));
  return {morse, nullity};
}

std::size_t eigen_columns(const StabilityGrid& grid) {
  std::size_t k = 0;
  for (const auto& r : grid.rows) k = std::max(k, r.eigenvalues.size());
  return k == 0 ? 4 : k;
}

}  // namespace

std::string_view to_string(OutputFormat f) {
  return f == OutputFormat::Csv ? "csv" : "json";
}

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  fail(ErrorCode::Config, "unknown format '" + std::string(name) + "' (expected csv or json)");
}

void ScanConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::Config, msg); };
  if (!in_range(u_min, kInvSqrt3, kSqrt3) || !in_range(u_max, kInvSqrt3, kSqrt3))
    bad("u range must lie within [1/sqrt(3), sqrt(3)]");
  if (u_min > u_max) bad("u_min exceeds u_max");
  if (!(e_min >= 0.0 && e_max <= 0.99)) bad("e range must lie within [0, 0.99]");
  if (e_min > e_max) bad("e_min exceeds e_max");
  if (n_u < 2 || n_e < 2) bad("grid must be at least 2 x 2");
  if (blocks.empty()) bad("at least one block is required");
  for (auto b : blocks)
    if (b == BlockKind::Kepler) bad("scan blocks must be drawn from xi, eta, full");
  if (!(rtol >= 1e-19 && atol >= 1e-19)) bad("rtol and atol must be >= 1e-19");
  if (!(circle_tol >= 1e-10 && circle_tol <= 1e-2)) bad("circle_tol must lie in [1e-10, 1e-2]");
  if (!(residual_budget > 0.0)) bad("residual_budget must be positive");
  if (index_N < 8) bad("index_N must be >= 8");
  if (workers < 1) bad("workers must be >= 1");
}

void ScanConfig::set(std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  if (key == "u_min") u_min = to_double(key, value);
  else if (key == "u_max") u_max = to_double(key, value);
  else if (key == "e_min") e_min = to_double(key, value);
  else if (key == "e_max") e_max = to_double(key, value);
  else if (key == "n_u") n_u = to_int(key, value);
  else if (key == "n_e") n_e = to_int(key, value);
  else if (key == "rtol") rtol = to_double(key, value);
  else if (key == "atol") atol = to_double(key, value);
  else if (key == "circle_tol") circle_tol = to_double(key, value);
  else if (key == "residual_budget") residual_budget = to_double(key, value);
  else if (key == "indices") indices = to_bool(key, value);
  else if (key == "index_N") index_N = to_int(key, value);
  else if (key == "output") output = trim(value);
  else if (key == "format") format = parse_format(trim(value));
  else if (key == "workers") workers = to_int(key, value);
  else if (key == "cache_dir") cache_dir = trim(value);
  else if (key == "blocks") {
    blocks.clear();
    for (const auto& part : split(value, ',')) {
      const std::string name = trim(part);
      if (!name.empty()) blocks.push_back(parse_block(name));
    }
  } else {
    fail(ErrorCode::Config, "unknown configuration key '" + key + "'");
  }
}

std::string ScanConfig::to_text() const {
  std::ostringstream os;
  os << "u_min = " << fmt17(u_min) << '\n'
     << "u_max = " << fmt17(u_max) << '\n'
     << "e_min = " << fmt17(e_min) << '\n'
     << "e_max = " << fmt17(e_max) << '\n'
     << "n_u = " << n_u << '\n'
     << "n_e = " << n_e << '\n'
     << "blocks = " << blocks_text(blocks) << '\n'
     << "rtol = " << fmt17(rtol) << '\n'
     << "atol = " << fmt17(atol) << '\n'
     << "circle_tol = " << fmt17(circle_tol) << '\n'
     << "residual_budget = " << fmt17(residual_budget) << '\n'
     << "indices = " << (indices ? "true" : "false") << '\n'
     << "index_N = " << index_N << '\n'
     << "output = " << output << '\n'
     << "format = " << to_string(format) << '\n'
     << "workers = " << workers << '\n'
     << "cache_dir = " << cache_dir << '\n';
  return os.str();
}

std::uint64_t ScanConfig::hash() const {
  std::ostringstream os;
  os << fmt17(u_min) << ';' << fmt17(u_max) << ';' << fmt17(e_min) << ';'
     << fmt17(e_max) << ';' << n_u << ';' << n_e << ';' << blocks_text(blocks)
     << ';' << fmt17(rtol) << ';' << fmt17(atol) << ';' << fmt17(circle_tol)
     << ';' << fmt17(residual_budget) << ';' << indices << ';' << index_N;
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

IntegrationOptions ScanConfig::integration() const {
  IntegrationOptions o;
  o.rtol = rtol;
  o.atol = atol;
  o.residual_budget = residual_budget;
  o.circle_tol = circle_tol;
  return o;
}

std::filesystem::path ScanConfig::resolved_cache_dir() const {
  if (!cache_dir.empty()) return cache_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return {};
}

ScanConfig parse_config(std::string_view text, ScanConfig base) {
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

ScanConfig load_config(const std::filesystem::path& path, ScanConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot read configuration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  if (n > 1) v.back() = hi;
  return v;
}

StabilityGrid run_scan(const ScanConfig& config) {
  config.validate();
  const auto us = linspace(config.u_min, config.u_max, config.n_u);
  const auto es = linspace(config.e_min, config.e_max, config.n_e);
  const auto opts = config.integration();

  struct Task {
    double u, e;
    BlockKind block;
  };
  std::vector<Task> tasks;
  for (double u : us)
    for (double e : es)
      for (auto b : config.blocks) tasks.push_back({u, e, b});

  struct Outcome {
    std::optional<ScanRow> row;
    std::string error;
  };
  std::vector<Outcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      try {
        const ShapeParam u(std::clamp(t.u, kInvSqrt3, kSqrt3));
        const Eccentricity e(t.e);
        const auto m = fundamental_solution(LinearSystem(t.block, u, e), opts);
        ScanRow row{t.u, t.e, t.block, m.eigenvalues, m.hyperbolic_pairs,
                    m.classification, m.symplectic_residual, std::nullopt, std::nullopt};
        if (config.indices) {
          const auto [morse, nullity] = row_indices(t.block, u, e, config.index_N);
          row.morse_index = morse;
          row.nullity = nullity;
        }
        outcomes[i].row = std::move(row);
      } catch (const std::exception& ex) {
        outcomes[i].error = ex.what();
      }
    }
  };

  const int n_threads = std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  StabilityGrid grid;
  grid.has_indices = config.indices;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (outcomes[i].row) grid.rows.push_back(std::move(*outcomes[i].row));
    else grid.failures.push_back({tasks[i].u, tasks[i].e, tasks[i].block, outcomes[i].error});
  }
  return grid;
}

StabilityGrid run_scan_cached(const ScanConfig& config, bool force) {
  config.validate();
  const auto dir = config.resolved_cache_dir();
  if (dir.empty()) return run_scan(config);
  char name[40];
  std::snprintf(name, sizeof name, "scan-%016llx.csv",
                static_cast<unsigned long long>(config.hash()));
  const auto path = dir / name;
  if (!force && std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      auto grid = parse_csv(ss.str());
      grid.from_cache = true;
      return grid;
    } catch (const Error&) {
      // unreadable cache entry: recompute
    }
  }
  auto grid = run_scan(config);
  if (grid.failures.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create cache directory " + dir.string());
    write_output(grid, OutputFormat::Csv, path);
  }
  return grid;
}

std::string to_csv(const StabilityGrid& grid) {
  const std::size_t k = eigen_columns(grid);
  std::string out = "u,e,block";
  for (std::size_t i = 1; i <= k; ++i) {
    out += ",re_lambda_" + std::to_string(i) + ",im_lambda_" + std::to_string(i);
  }
  out += ",hyperbolic_pairs,classification,residual";
  if (grid.has_indices) out += ",morse_index,nullity";
  out += '\n';
  for (const auto& r : grid.rows) {
    out += fmt17(r.u) + ',' + fmt17(r.e) + ',' + std::string(to_string(r.block));
    for (std::size_t i = 0; i < k; ++i) {
      if (i < r.eigenvalues.size()) {
        out += ',' + fmt17(r.eigenvalues[i].real()) + ',' + fmt17(r.eigenvalues[i].imag());
      } else {
        out += ",,";
      }
    }
    out += ',' + std::to_string(r.hyperbolic_pairs) + ',' +
           std::string(to_string(r.classification)) + ',' + fmt17(r.residual);
    if (grid.has_indices) {
      out += ',' + (r.morse_index ? std::to_string(*r.morse_index) : std::string()) +
             ',' + (r.nullity ? std::to_string(*r.nullity) : std::string());
    }
    out += '\n';
  }
  return out;
}

StabilityGrid parse_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::Io, "empty CSV input");
  const auto header = split(trim(lines[0]), ',');
  if (header.size() < 6 || header[0] != "u" || header[1] != "e" || header[2] != "block")
    fail(ErrorCode::Io, "unrecognised CSV header");
  StabilityGrid grid;
  grid.has_indices = header.back() == "nullity";
  const std::size_t tail = grid.has_indices ? 5 : 3;
  if ((header.size() - 3 - tail) % 2 != 0) fail(ErrorCode::Io, "malformed CSV header");
  const std::size_t k = (header.size() - 3 - tail) / 2;

  auto num = [](const std::string& s) {
    try {
      return to_double("csv field", s);
    } catch (const Error&) {
      fail(ErrorCode::Io, "malformed CSV number '" + s + "'");
    }
  };
  auto integer = [](const std::string& s) {
    try {
      return to_int("csv field", s);
    } catch (const Error&) {
      fail(ErrorCode::Io, "malformed CSV integer '" + s + "'");
    }
  };

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(trim(lines[li]), ',');
    if (f.size() != header.size())
      fail(ErrorCode::Io, "CSV line " + std::to_string(li + 1) + " has wrong field count");
    ScanRow r;
    r.u = num(f[0]);
    r.e = num(f[1]);
    try {
      r.block = parse_block(f[2]);
    } catch (const Error&) {
      fail(ErrorCode::Io, "unknown block '" + f[2] + "' in CSV");
    }
    for (std::size_t i = 0; i < k; ++i) {
      const auto& re = f[3 + 2 * i];
      const auto& im = f[4 + 2 * i];
      if (re.empty() && im.empty()) continue;
      r.eigenvalues.emplace_back(num(re), num(im));
    }
    const std::size_t base = 3 + 2 * k;
    r.hyperbolic_pairs = integer(f[base]);
    r.classification = parse_classification(f[base + 1]);
    r.residual = num(f[base + 2]);
    if (grid.has_indices) {
      if (!f[base + 3].empty()) r.morse_index = integer(f[base + 3]);
      if (!f[base + 4].empty()) r.nullity = integer(f[base + 4]);
    }
    grid.rows.push_back(std::move(r));
  }
  return grid;
}

std::string to_json(const StabilityGrid& grid) {
  json rows = json::array();
  for (const auto& r : grid.rows) {
    json eig = json::array();
    for (const auto& z : r.eigenvalues) eig.push_back({z.real(), z.imag()});
    json row = {{"u", r.u},
                {"e", r.e},
                {"block", std::string(to_string(r.block))},
                {"eigenvalues", eig},
                {"hyperbolic_pairs", r.hyperbolic_pairs},
                {"classification", std::string(to_string(r.classification))},
                {"residual", r.residual}};
    if (grid.has_indices) {
      row["morse_index"] = r.morse_index ? json(*r.morse_index) : json(nullptr);
      row["nullity"] = r.nullity ? json(*r.nullity) : json(nullptr);
    }
    rows.push_back(std::move(row));
  }
  json failures = json::array();
  for (const auto& f : grid.failures) {
    failures.push_back({{"u", f.u},
                        {"e", f.e},
                        {"block", std::string(to_string(f.block))},
                        {"message", f.message}});
  }
  json doc = {{"has_indices", grid.has_indices}, {"rows", rows}, {"failures", failures}};
  return doc.dump(2) + "\n";
}

StabilityGrid parse_json(std::string_view text) {
  StabilityGrid grid;
  try {
    const json doc = json::parse(text);
    grid.has_indices = doc.at("has_indices").get<bool>();
    for (const auto& row : doc.at("rows")) {
      ScanRow r;
      r.u = row.at("u").get<double>();
      r.e = row.at("e").get<double>();
      r.block = parse_block(row.at("block").get<std::string>());
      for (const auto& z : row.at("eigenvalues"))
        r.eigenvalues.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
      r.hyperbolic_pairs = row.at("hyperbolic_pairs").get<int>();
      r.classification = parse_classification(row.at("classification").get<std::string>());
      r.residual = row.at("residual").get<double>();
      if (grid.has_indices) {
        if (!row.at("morse_index").is_null()) r.morse_index = row.at("morse_index").get<int>();
        if (!row.at("nullity").is_null()) r.nullity = row.at("nullity").get<int>();
      }
      grid.rows.push_back(std::move(r));
    }
    for (const auto& f : doc.at("failures")) {
      grid.failures.push_back({f.at("u").get<double>(), f.at("e").get<double>(),
                               parse_block(f.at("block").get<std::string>()),
                               f.at("message").get<std::string>()});
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::Io, std::string("malformed scan JSON: ") + ex.what());
  } catch (const Error& ex) {
    fail(ErrorCode::Io, std::string("malformed scan JSON: ") + ex.what());
  }
  return grid;
}

std::string serialize(const StabilityGrid& grid, OutputFormat format) {
  return format == OutputFormat::Csv ? to_csv(grid) : to_json(grid);
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) fail(ErrorCode::Io, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::Io, "cannot move output into place at " + path.string());
  }
}

void write_output(const StabilityGrid& grid, OutputFormat format,
                  const std::filesystem::path& path) {
  write_text_atomic(path, serialize(grid, format));
}

}  // namespace rhombus
