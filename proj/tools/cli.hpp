#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigsim/gigsim.hpp"

namespace gigsim::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kStatistical = 2,
  kNumerical = 3,
};

/// min:max:points[:log]
struct GridSpec {
  double min = 0.0;
  double max = 1.0;
  std::size_t points = 2;
  bool log = false;

  std::vector<double> values() const;
  std::string to_string() const;
  static GridSpec parse(const std::string& text);
};

struct RunConfig {
  std::string command;
  std::string process = "gig";  // gig | gh
  double lambda = -0.5;
  double gamma = 1.0;
  double delta = 1.0;
  double mu_w = 0.0;
  double sigma_w = 1.0;
  double horizon = 1.0;
  std::size_t epochs = 1000;
  std::size_t n2_epochs = 0;
  std::optional<std::size_t> n;
  std::uint64_t seed = 1;
  std::string z0 = "auto";
  std::string n1_method = "auto";       // auto | ts | two-gamma
  std::string n2_method = "half-stable";  // half-stable | alpha1
  std::optional<std::string> grid;
  std::string out;
  std::string format = "csv";  // csv | json
  // verify
  std::string setting = "all";
  double max_d = 0.01;
  double alpha = 0.01;
  double oracle_lambda_offset = 0.0;
  std::string qq_prefix;
  std::size_t bins = 50;

  GigParams gig_params() const { return {lambda, gamma, delta}; }
  GhParams gh_params() const { return {gig_params(), mu_w, sigma_w}; }
  GigOptions gig_options() const;
  std::size_t count() const;
  GridSpec grid_spec() const;
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// Parses argv (without the program name) and runs the command. Data goes
/// to --out or `out`; diagnostics to `err`. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gigsim::cli
