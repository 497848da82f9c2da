#pragma once

// The dagma command-line tool as a library, so tests can drive each command
// without spawning processes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dagma/acyclicity.hpp"
#include "dagma/datagen.hpp"
#include "dagma/error.hpp"
#include "dagma/io.hpp"
#include "dagma/metrics.hpp"
#include "dagma/optimizer.hpp"

namespace dagma::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, usage = 2, numerical = 3, io_failure = 4 };

/// Maps a library error to the process exit code.
int exit_code_for(ErrorCode code);

struct GenOptions {
  SimulationSpec spec;
  std::filesystem::path out_dir = ".";
};
/// Writes X.csv, truth.json and manifest.json into out_dir.
Simulation cmd_gen(const GenOptions& opt);

struct FitOptions {
  std::filesystem::path data;
  ModelKind model = ModelKind::linear_l2;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
};
/// Writes fit.json and fit.manifest.json into out_dir.
FitResult cmd_fit(const FitOptions& opt);

struct EvalOptions {
  std::filesystem::path truth;
  std::filesystem::path fit;
  std::filesystem::path out_dir = ".";
};
/// Writes eval.json, eval.csv (one row, no header) and eval.manifest.json.
EvalReport cmd_eval(const EvalOptions& opt);

struct CycleRow {
  Index d = 0;
  double h_expm = 0.0;
  double h_poly = 0.0;
  double h_ldet = 0.0;
  double grad_expm_inf = 0.0;
  double grad_poly_inf = 0.0;
  double grad_ldet_inf = 0.0;
};
/// Unit-weight d-cycles for d = 2 .. d_max.
std::vector<CycleRow> cycle_study(Index d_max, double s);
std::string cycle_csv(const std::vector<CycleRow>& rows);

struct CycleStudyOptions {
  Index d_max = 100;
  double s = 1.001;
  std::filesystem::path out = "cycle_study.csv";
};
std::vector<CycleRow> cmd_cycle_study(const CycleStudyOptions& opt);

struct BenchRow {
  std::string kind;
  Index d = 0;
  int trials = 0;
  double median_seconds = 0.0;
  double q1_seconds = 0.0;
  double q3_seconds = 0.0;
  double iqr_seconds() const { return q3_seconds - q1_seconds; }
};
/// Times h value + gradient for ldet (s = 1), expm and poly on standard
/// Gaussian matrices rescaled so that rho(W∘W) = 0.9.
std::vector<BenchRow> bench_h(const std::vector<Index>& dims, int trials, std::uint64_t seed,
                              const std::vector<Acyclicity::Kind>& kinds = {Acyclicity::Kind::ldet,
                                                                            Acyclicity::Kind::expm,
                                                                            Acyclicity::Kind::poly});
std::string bench_csv(const std::vector<BenchRow>& rows);

struct BenchOptions {
  std::vector<Index> dims{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  int trials = 30;
  std::uint64_t seed = 0;
  std::filesystem::path out = "bench_h.csv";
};
std::vector<BenchRow> cmd_bench_h(const BenchOptions& opt);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace dagma::cli
