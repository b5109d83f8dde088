#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhd/assembly.hpp"
#include "mhd/mhd.hpp"

namespace mhd {

/// Invalid or inconsistent configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
  std::optional<int> mesh_builtin;
  std::optional<std::string> mesh_msh2;
  MhdParams params;
  double tol = 1e-10;
  int maxit = 50;
  /// Source scaling of the builtin case; empty for the zero-source case.
  std::optional<double> case_lambda;
  std::vector<int> levels{2, 4, 8};
  int samples = 50;
  std::string csv_path;
  std::string json_path;
  QuadDegrees quad;
  std::uint64_t seed = 42;
};

/// Validates the schema: exactly one mesh source, exactly one case, tol in (0,1), positive parameters.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

int cmd_solve(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_convergence(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_complex_check(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_l3_study(const RunConfig& config, const std::string& out_dir, std::ostream& log);

/// `mhd solve|convergence|complex-check|l3-study --config <path.json> [--out-dir <dir>]`
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mhd
