#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kflow/special_flow.hpp"

namespace kflow {

struct ExperimentConfig {
  double gamma1 = -0.7;
  double gamma2 = -0.3;
  std::string alpha1 = "golden";
  std::string alpha2 = "sqrt2m1";
  int cf_depth = 40;
  bool normalize = true;
  int m = 4;
  std::vector<std::int64_t> n_list{1024, 2048, 4096, 8192, 16384};
  int pair_count = 20;
  std::uint64_t seed = 1;
  double eps2 = 0.001;
  int threads = 0;  ///< 0: hardware concurrency
  std::string output_dir = ".";

  // verification sweep sizes
  int dk_cases = 1000;
  int dichotomy_pairs = 200;
  int sandwich_points = 10;
  double sandwich_horizon = 1e4;
  int sandwich_grid = 4000;
  int nlower_cases = 200;
  int shadow_k_min = 10;
  int shadow_k_max = 20;

  /// Every field as key/value text, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys and bad
/// values throw PreconditionError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Applies one "key=value" override.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct EpsilonPair {
  double eps0 = 0.0;
  double eps2 = 0.0;
  double side_lhs = 0.0;  ///< (1 - 2 eps0)(1 + |g1| - eps2)
  double side_rhs = 0.0;  ///< 1 + |g2| + eps2
  /// Least R = 2^k, 10 <= k <= 30, from which the R-inequality holds at every
  /// tested larger R; 0 when it fails at R = 2^30.
  std::int64_t r0_estimate = 0;
  std::vector<std::pair<std::int64_t, bool>> grid;
};

/// eps0 = 2 eps2 / (|g2| (1 + |g2|)). Requires |g1| > |g2| and eps2 >= 0;
/// throws PreconditionError when the side condition fails.
EpsilonPair epsilon_params(double gamma1, double gamma2, double eps2);

/// Both sides of the R-inequality relating eps0, eps2 at one R.
std::pair<double, double> rweps0_sides(double gamma1, double gamma2, double eps0, double eps2, double r);

ProductSystem make_system(const ExperimentConfig& cfg);

struct ProbeRow {
  std::int64_t n = 0;
  int pair = 0;
  std::size_t length = 0;
  double fbar = 0.0;
  std::size_t cardinality = 0;
  bool good = false;
};

struct ProbeResult {
  std::vector<ProbeRow> single1, single2, product;
  std::vector<std::string> files;
};

/// Samples pair_count pairs of product points, codes their orbits under
/// P_m x P_m for every N in n_list and records exact f-bar distances for the
/// two factors and the product. Writes probe_single1.csv, probe_single2.csv
/// and probe_product.csv into output_dir when write_files is set.
ProbeResult run_standardness_probe(const ExperimentConfig& cfg, bool write_files = true);

struct SweepSummary {
  std::int64_t cases = 0;
  std::int64_t passes = 0;
  double worst_margin = 0.0;
  bool hard = false;  ///< failures make the run exit nonzero
};

struct VerifyResult {
  std::map<std::string, SweepSummary> sweeps;
  EpsilonPair eps;
  std::vector<std::string> files;
  /// A hard sweep (dk, dichotomy) has a failing case.
  bool violation() const;
};

/// Runs the DK, dichotomy, sandwich, N-lower-bound and shadow-set sweeps and
/// writes one CSV each plus summary.json into output_dir.
VerifyResult run_verification_sweeps(const ExperimentConfig& cfg, bool write_files = true);

}  // namespace kflow
