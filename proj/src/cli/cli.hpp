#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracsys/decomposition.hpp"

namespace fracsys::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kInvariantFailure = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gaussian bump a * exp(-|x - c|^2 / (2 w^2)).
struct Bump {
  std::array<double, 2> center{0.0, 0.0};
  double width = 1.0;
  double amplitude = 1.0;
};

struct ForcingSpec {
  // "threshold_fraction": each component is rescaled so that its dual norm is
  // `amplitude` times the admissibility threshold, with the bump amplitudes
  // giving the shape. "absolute": bumps are used as written.
  std::string units = "threshold_fraction";
  double amplitude = 0.5;
  std::vector<Bump> f;
  std::vector<Bump> g;
};

struct ConstantsSpec {
  std::vector<double> mu{1e-6, 1e-4, 1e-2};
  double h_mu = 1e-2;
  double h_tau_min = 1e-3;
  double h_tau_max = 5.0;
  int h_points = 200;
};

struct GroundStateSpec {
  double scale = 0.1;
  double t_prime = 4.0;
  std::array<double, 2> center{0.0, 0.0};
  // Starting profiles for the quotient minimization: random sums of Gaussians.
  int restarts = 1;
};

struct SyntheticBubble {
  std::array<double, 2> center{0.0, 0.0};
  double scale = 1.0;
  // B; C follows from the ground-state ratio.
  double amplitude = 0.0;
};

struct DecomposeSpec {
  // "synthetic": limit (forced solution, or zero) plus the listed bubbles.
  // "fields": read <input_stem>_u.bin and <input_stem>_v.bin.
  std::string input = "synthetic";
  std::string input_stem;
  bool include_limit = true;
  std::vector<SyntheticBubble> bubbles;
  DecomposeOpts opts;
};

struct VerifySpec {
  int random_starts = 5;
  int corpus_random = 200;
  int corpus_bubbles = 20;
  int test_pairs = 20;
  int quadruples = 100000;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  GridSpec grid;
  SystemParams params;
  ForcingSpec forcing;
  SolverOpts quotient = SolverOpts::quotient();
  SolverOpts first_solution = SolverOpts::first_solution();
  SolverOpts mountain_pass = SolverOpts::mountain_pass();
  ConstantsSpec constants;
  GroundStateSpec ground_state;
  DecomposeSpec decompose;
  VerifySpec verify;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0;
  std::string kappa_cache;

  void validate() const;
};

// Parse and validate. Unknown keys and type errors raise ConfigError with the
// line of the offending key.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

ForcingPair build_forcing(const RunConfig& cfg, double sab_estimate);

// Shared state of one run: config, output directory, verbosity.
struct Context {
  RunConfig cfg;
  std::filesystem::path out;
  bool verbose = false;

  void log(const std::string& msg) const;
  std::filesystem::path path(const std::string& name) const { return out / name; }
};

// A report is {schema_version, command, config, convention_dependent,
// convention_free, status}; run metadata (timings, threads) goes to a
// separate <command>.meta.json.
struct Report {
  std::string command;
  nlohmann::json convention_dependent = nlohmann::json::object();
  nlohmann::json convention_free = nlohmann::json::object();
  nlohmann::json meta = nlohmann::json::object();
  int exit_code = kOk;
};

void write_report(const Context& ctx, const Report& r);
void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& rows);

Report cmd_constants(const Context& ctx);
Report cmd_ground_state(const Context& ctx);
Report cmd_two_solutions(const Context& ctx);
Report cmd_decompose(const Context& ctx);
Report cmd_verify(const Context& ctx);

// Shared pieces of the pipelines.

// Sum of 2 to 4 Gaussians near the origin with seeded centers, widths and
// amplitudes; positive everywhere.
Field random_start(const GridSpec& g, std::mt19937_64& rng);
// Sum of 1 to 5 Gaussians of either sign anywhere in the inner half-box.
Field random_smooth(const GridSpec& g, std::mt19937_64& rng);

struct QuotientRuns {
  QuotientResult scalar;
  QuotientResult system;
};
// Scalar and system minimization from the fixed start profiles, plus
// `restarts - 1` seeded random starts each; the lowest value is kept.
QuotientRuns ground_state_quotients(const RunConfig& cfg);

struct Alignment {
  std::array<double, 2> center{0.0, 0.0};
  double scale = 0.0;
  // L^2 cosine between u and the bubble at (center, scale).
  double correlation = 0.0;
};
// Best L^2 match of u against talenti_bubble over center (within a grid cell
// of the peak) and scale.
Alignment align_bubble(const Field& u);

// Pointwise v/u on the nodes where u > rel * max u.
struct RatioStats {
  // (max - min) / tau
  double spread = 0.0;
  double mean = 0.0;
  // max |v/u - tau| / tau
  double max_dev = 0.0;
};
RatioStats ratio_stats(const FieldPair& p, double tau, double rel = 0.01);

// |<pair, (phi, psi)>_{H^s} - coupling terms - forcing terms| / (||pair|| ||(phi, psi)||),
// maximized over `count` seeded random smooth test pairs.
double weak_residual(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params, int count,
                     std::uint64_t seed);

// Limit pair plus bubbles from the decompose section.
struct SyntheticInput {
  FieldPair pair;
  FieldPair limit;
  ForcingPair forcing;
  std::vector<BubbleFit> truth;
};
SyntheticInput synthetic_input(const RunConfig& cfg, double sab_estimate);

nlohmann::json bubble_json(const BubbleFit& b, int dim);

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  // "<" or ">": the check passes iff `value relation bound`.
  std::string relation;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};
nlohmann::json to_json(const Check& c);

// Entry point used by tools/fracsys.cpp; returns the process exit code.
int run(int argc, char** argv);

}  // namespace fracsys::cli
