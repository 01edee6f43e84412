#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rggloc/point_process.hpp"

namespace rggloc {

// Exit codes of the command-line driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTestFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitBudget = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One flat JSON document, schema "runconfig.v1". Exactly one of r and
// p_target; with p_target, r = (2 n^(p_target - 2) / nu)^(1/d), so the
// expected edge count is n^p_target exactly.
struct RunConfig {
  // model
  double n = 0.0;
  std::optional<double> r;
  std::optional<double> p_target;
  double delta_star = 0.5;
  int d = 2;
  std::string norm = "L2";
  // grid
  int s = 5;
  // conditioning
  double delta = 1.0;
  double delta_tilde = 1.0;
  double eps = 0.25;
  double eps_tilde = 0.2;
  // sampler
  std::string method = "planted";       // "planted" or "rejection"
  std::string plant_mode = "conditioned";  // "conditioned" or "tilted"
  bool slack = true;
  std::uint64_t replicas = 200;
  std::uint64_t budget = 1000;
  double t = 1.0;
  std::vector<double> n_sweep;
  double sandwich_eps = 0.1;
  std::uint64_t store = 5;  // configurations written by `condition`
  // verify
  std::string verify_scale = "quick";

  std::uint64_t seed = 1;
  std::string output_dir = "rggloc_out";
  std::string snapshot;  // canonical JSON of the parsed document

  ModelParams params() const;
  // Same model at a different intensity; p_target (if given) is kept fixed,
  // otherwise r is.
  ModelParams params_at(double n_value) const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> input;  // extract: point set or cell config CSV
  bool quiet = false;
};

// Runs one subcommand (grid-info, simulate, condition, extract, tail, verify)
// and returns its exit code. Errors are reported on `err`.
int run_command(const std::string& command, const std::string& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace rggloc
