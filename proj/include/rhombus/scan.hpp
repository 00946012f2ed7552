#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rhombus/monodromy.hpp"

namespace rhombus {

enum class OutputFormat { Csv, Json };

std::string_view to_string(OutputFormat f);
OutputFormat parse_format(std::string_view name);

/// Environment variable naming the default output / cache directory.
inline constexpr const char* kOutputDirEnv = "RHOMBUS_OUTPUT_DIR";

struct ScanConfig {
  double u_min = kInvSqrt3;
  double u_max = kSqrt3;
  double e_min = 0.0;
  double e_max = 0.95;
  int n_u = 25;
  int n_e = 10;
  std::vector<BlockKind> blocks{BlockKind::Xi, BlockKind::Eta};
  double rtol = 1e-16;
  double atol = 1e-16;
  double circle_tol = 1e-6;
  double residual_budget = 1e-9;
  bool indices = false;
  int index_N = 64;
  std::string output;     ///< empty: standard output
  OutputFormat format = OutputFormat::Csv;
  int workers = 1;
  std::string cache_dir;  ///< empty: $RHOMBUS_OUTPUT_DIR, else no cache

  /// Throws ErrorCode::Config on any out-of-domain field.
  void validate() const;
  /// Sets one field from its textual form; throws Config on unknown keys
  /// or malformed values.
  void set(std::string_view key, std::string_view value);
  /// Flat "key = value" listing of every field, in a fixed order.
  std::string to_text() const;
  /// FNV-1a hash of the fields that affect computed results.
  std::uint64_t hash() const;
  IntegrationOptions integration() const;
  /// cache_dir, or the environment default, or empty.
  std::filesystem::path resolved_cache_dir() const;
};

/// Parses flat "key = value" text ('#' starts a comment) on top of `base`.
ScanConfig parse_config(std::string_view text, ScanConfig base = {});
ScanConfig load_config(const std::filesystem::path& path, ScanConfig base = {});

struct ScanRow {
  double u;
  double e;
  BlockKind block;
  std::vector<std::complex<double>> eigenvalues;
  int hyperbolic_pairs;
  Classification classification;
  double residual;
  std::optional<int> morse_index;
  std::optional<int> nullity;
};

struct ScanFailure {
  double u;
  double e;
  BlockKind block;
  std::string message;
};

struct StabilityGrid {
  std::vector<ScanRow> rows;
  std::vector<ScanFailure> failures;
  bool has_indices = false;
  bool from_cache = false;
};

/// n equispaced points, both endpoints included; n = 1 gives {lo}.
std::vector<double> linspace(double lo, double hi, int n);

/// Evaluates every (u, e, block) point, row-major in u then e then block
/// order. Work is shared between `workers` threads; output order and
/// contents do not depend on the worker count.
StabilityGrid run_scan(const ScanConfig& config);

/// run_scan with a result cache under resolved_cache_dir(), keyed by hash().
StabilityGrid run_scan_cached(const ScanConfig& config, bool force);

std::string to_csv(const StabilityGrid& grid);
std::string to_json(const StabilityGrid& grid);
StabilityGrid parse_csv(std::string_view text);
StabilityGrid parse_json(std::string_view text);
std::string serialize(const StabilityGrid& grid, OutputFormat format);

/// Writes to a sibling temporary file and renames it into place.
void write_output(const StabilityGrid& grid, OutputFormat format,
                  const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace rhombus
