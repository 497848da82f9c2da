#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "dagma/acyclicity.hpp"
#include "dagma/error.hpp"
#include "dagma/rng.hpp"

namespace dagma::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command;
  Json config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started = utc_now();

  void write(const fs::path& path) const {
    Json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["tool_version"] = kVersion;
    j["started_utc"] = started;
    j["finished_utc"] = utc_now();
    write_json(path, j);
  }
};

Json spec_json(const SimulationSpec& s) {
  return {{"graph", std::string(to_string(s.graph))}, {"k", s.k},
          {"d", s.d},
          {"n", s.n},
          {"model", std::string(to_string(s.model))},
          {"noise", std::string(to_string(s.noise))},
          {"seed", s.seed}};
}

Matrix cycle(Index d) {
  Matrix c = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) c(i, (i + 1) % d) = 1.0;
  return c;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string kind_name(Acyclicity::Kind k) {
  switch (k) {
    case Acyclicity::Kind::ldet: return "ldet";
    case Acyclicity::Kind::expm: return "expm";
    case Acyclicity::Kind::poly: return "poly";
    case Acyclicity::Kind::tinv: return "tinv";
  }
  return "ldet";
}

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 2) throw std::invalid_argument(item);
      dims.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--dims", "expected a comma-separated list of integers >= 2");
    }
  }
  if (dims.empty()) throw CLI::ValidationError("--dims", "empty list");
  return dims;
}

/// "a..b" or a single integer.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  try {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
      const auto v = std::stoull(text);
      return {v, v};
    }
    const auto a = std::stoull(text.substr(0, dots));
    const auto b = std::stoull(text.substr(dots + 2));
    if (b < a) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--seeds", "expected a..b with a <= b");
  }
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return io_failure;
    case ErrorCode::singular_matrix:
    case ErrorCode::out_of_domain:
    case ErrorCode::non_finite_gradient:
    case ErrorCode::non_finite_objective:
    case ErrorCode::domain_collapse: return numerical;
    default: return usage;
  }
}

Simulation cmd_gen(const GenOptions& opt) {
  Manifest m;
  m.command = "gen";
  m.config = spec_json(opt.spec);
  m.seed = opt.spec.seed;
  Simulation sim = simulate(opt.spec);
  write_csv(opt.out_dir / "X.csv", sim.data);
  write_json(opt.out_dir / "truth.json", to_json(sim.truth));
  m.outputs = {(opt.out_dir / "X.csv").string(), (opt.out_dir / "truth.json").string()};
  m.write(opt.out_dir / "manifest.json");
  return sim;
}

FitResult cmd_fit(const FitOptions& opt) {
  Manifest m;
  m.command = "fit";
  DagmaConfig cfg = opt.config ? config_from_json(read_json(*opt.config), opt.model)
                               : DagmaConfig::defaults(opt.model);
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.validate();
  m.config = to_json(cfg);
  m.seed = cfg.seed;
  m.inputs.push_back(opt.data.string());
  if (opt.config) m.inputs.push_back(opt.config->string());

  const Matrix x = read_csv(opt.data);
  FitResult fit = dagma_fit(x, cfg);
  for (const std::string& w : fit.warnings) std::cerr << "warning: " << w << "\n";
  write_json(opt.out_dir / "fit.json", to_json(fit));
  m.outputs = {(opt.out_dir / "fit.json").string()};
  m.write(opt.out_dir / "fit.manifest.json");
  return fit;
}

EvalReport cmd_eval(const EvalOptions& opt) {
  Manifest m;
  m.command = "eval";
  m.inputs = {opt.truth.string(), opt.fit.string()};
  const GroundTruth truth = truth_from_json(read_json(opt.truth));
  const Json fit = read_json(opt.fit);
  if (!fit.contains("B")) throw Error(ErrorCode::io, opt.fit.string() + ": missing B");
  const Adjacency estimate = adjacency_from_json(fit.at("B"));
  const EvalReport r = evaluate(truth.binary, estimate);
  write_json(opt.out_dir / "eval.json", to_json(r));
  write_text_atomic(opt.out_dir / "eval.csv", eval_csv_row(r) + "\n");
  m.outputs = {(opt.out_dir / "eval.json").string(), (opt.out_dir / "eval.csv").string()};
  m.write(opt.out_dir / "eval.manifest.json");
  return r;
}

std::vector<CycleRow> cycle_study(Index d_max, double s) {
  std::vector<CycleRow> rows;
  for (Index d = 2; d <= d_max; ++d) {
    const Matrix c = cycle(d);
    const HEvaluation e = h_value_and_gradient(c, Acyclicity::expm());
    const HEvaluation p = h_value_and_gradient(c, Acyclicity::poly());
    const HEvaluation l = h_value_and_gradient(c, Acyclicity::ldet(s));
    rows.push_back({d, e.value, p.value, l.value, max_abs(e.gradient), max_abs(p.gradient),
                    max_abs(l.gradient)});
  }
  return rows;
}

std::string cycle_csv(const std::vector<CycleRow>& rows) {
  std::string out = "d,h_expm,h_poly,h_ldet,grad_expm_inf,grad_poly_inf,grad_ldet_inf\n";
  for (const CycleRow& r : rows) {
    out += std::to_string(r.d) + ',' + format_double(r.h_expm) + ',' + format_double(r.h_poly) + ',' +
           format_double(r.h_ldet) + ',' + format_double(r.grad_expm_inf) + ',' +
           format_double(r.grad_poly_inf) + ',' + format_double(r.grad_ldet_inf) + '\n';
  }
  return out;
}

std::vector<CycleRow> cmd_cycle_study(const CycleStudyOptions& opt) {
  if (opt.d_max < 2) throw Error(ErrorCode::invalid_config, "--d-max must be at least 2");
  if (!(opt.s > 1.0)) throw Error(ErrorCode::invalid_config, "--s must exceed 1 for unit-weight cycles");
  auto rows = cycle_study(opt.d_max, opt.s);
  write_text_atomic(opt.out, cycle_csv(rows));
  return rows;
}

std::vector<BenchRow> bench_h(const std::vector<Index>& dims, int trials, std::uint64_t seed,
                              const std::vector<Acyclicity::Kind>& kinds) {
  Eigen::setNbThreads(1);
  using clock = std::chrono::steady_clock;
  const Rng root = Rng(seed).child(Stream::bench);
  std::vector<BenchRow> rows;
  for (Index d : dims) {
    std::vector<Matrix> inputs;
    const Rng drng = root.child(static_cast<std::uint64_t>(d));
    for (int t = 0; t < trials; ++t) {
      Rng rng = drng.child(static_cast<std::uint64_t>(t));
      Matrix w(d, d);
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) w(i, j) = rng.normal();
      const double rho = spectral_radius_nonneg(w.cwiseAbs2(), 1e-10, 100000).value;
      w *= std::sqrt(0.9 / rho);
      inputs.push_back(std::move(w));
    }
    for (Acyclicity::Kind kind : kinds) {
      const Acyclicity a{kind, 1.0};
      double sink = 0.0;
      for (int warm = 0; warm < 2; ++warm) sink += h_value_and_gradient(inputs.front(), a).value;
      std::vector<double> times;
      for (const Matrix& w : inputs) {
        const auto t0 = clock::now();
        const HEvaluation e = h_value_and_gradient(w, a);
        const auto t1 = clock::now();
        sink += e.value + e.gradient(0, 0);
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      if (!std::isfinite(sink)) throw Error(ErrorCode::non_finite_objective, "benchmark produced NaN");
      rows.push_back({kind_name(kind), d, trials, quantile(times, 0.5), quantile(times, 0.25),
                      quantile(times, 0.75)});
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "kind,d,trials,median_seconds,iqr_seconds,q1_seconds,q3_seconds\n";
  for (const BenchRow& r : rows) {
    out += r.kind + ',' + std::to_string(r.d) + ',' + std::to_string(r.trials) + ',' +
           format_double(r.median_seconds) + ',' + format_double(r.iqr_seconds()) + ',' +
           format_double(r.q1_seconds) + ',' + format_double(r.q3_seconds) + '\n';
  }
  return out;
}

std::vector<BenchRow> cmd_bench_h(const BenchOptions& opt) {
  if (opt.trials < 1) throw Error(ErrorCode::invalid_config, "--trials must be positive");
  auto rows = bench_h(opt.dims, opt.trials, opt.seed);
  write_text_atomic(opt.out, bench_csv(rows));
  return rows;
}

int run(int argc, char** argv) {
  CLI::App app{"DAGMA: DAG learning with a log-determinant acyclicity characterization"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // gen
  GenOptions gen;
  std::string graph = "er", model = "linear", noise = "gauss", seeds;
  auto* g = app.add_subcommand("gen", "simulate a ground-truth DAG and data");
  g->add_option("--graph", graph, "er or sf")->check(CLI::IsMember({"er", "sf"}));
  g->add_option("--k", gen.spec.k, "expected edges per node")->capture_default_str();
  g->add_option("--d", gen.spec.d, "number of nodes")->capture_default_str();
  g->add_option("--n", gen.spec.n, "number of samples")->capture_default_str();
  g->add_option("--model", model, "linear, logistic or mlp")
      ->check(CLI::IsMember({"linear", "logistic", "mlp"}));
  g->add_option("--noise", noise, "gauss, exp or gumbel")->check(CLI::IsMember({"gauss", "exp", "gumbel"}));
  auto* seed_opt = g->add_option("--seed", gen.spec.seed, "random seed")->capture_default_str();
  g->add_option("--seeds", seeds, "seed range a..b; one sub-directory seed_<s> per seed")
      ->excludes(seed_opt);
  g->add_option("--out-dir", gen.out_dir, "output directory")->capture_default_str();

  // fit
  FitOptions fit;
  std::string fit_model = "linear";
  std::uint64_t fit_seed = 0;
  auto* f = app.add_subcommand("fit", "learn a DAG from X.csv");
  f->add_option("--data", fit.data, "headerless numeric CSV")->required()->check(CLI::ExistingFile);
  f->add_option("--model", fit_model, "linear, logistic or mlp")
      ->check(CLI::IsMember({"linear", "logistic", "mlp"}));
  auto* config_opt = f->add_option("--config", "JSON config overriding the model defaults");
  auto* fit_seed_opt = f->add_option("--seed", fit_seed, "seed for random initialization");
  f->add_option("--out", fit.out_dir, "output directory")->capture_default_str();

  // eval
  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "compare a fitted graph with the truth");
  e->add_option("--truth", ev.truth, "truth.json")->required()->check(CLI::ExistingFile);
  e->add_option("--fit", ev.fit, "fit.json")->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out_dir, "output directory")->capture_default_str();

  // cycle-study
  CycleStudyOptions cs;
  auto* c = app.add_subcommand("cycle-study", "h on unit-weight d-cycles");
  c->add_option("--d-max", cs.d_max, "largest cycle length")->capture_default_str();
  c->add_option("--s", cs.s, "log-det parameter")->capture_default_str();
  c->add_option("--out", cs.out, "CSV path")->capture_default_str();

  // bench-h
  BenchOptions bo;
  std::string dims;
  auto* b = app.add_subcommand("bench-h", "time h value + gradient for ldet, expm and poly");
  b->add_option("--dims", dims, "comma-separated dimensions (default 100,200,...,1000)");
  b->add_option("--trials", bo.trials, "matrices per dimension")->capture_default_str();
  b->add_option("--seed", bo.seed, "random seed")->capture_default_str();
  b->add_option("--out", bo.out, "CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? ok : usage;
  }

  try {
    if (g->parsed()) {
      gen.spec.graph = *parse_graph_family(graph);
      gen.spec.model = *parse_sem_family(model);
      gen.spec.noise = *parse_noise_kind(noise);
      if (!seeds.empty()) {
        const auto [lo, hi] = parse_seed_range(seeds);
        const fs::path base = gen.out_dir;
        for (std::uint64_t s = lo;; ++s) {
          GenOptions one = gen;
          one.spec.seed = s;
          one.out_dir = base / ("seed_" + std::to_string(s));
          cmd_gen(one);
          if (s == hi) break;
        }
      } else {
        cmd_gen(gen);
      }
    } else if (f->parsed()) {
      fit.model = *parse_model_kind(fit_model);
      if (config_opt->count()) fit.config = config_opt->as<std::string>();
      if (fit_seed_opt->count()) fit.seed = fit_seed;
      const FitResult r = cmd_fit(fit);
      std::cout << "is_dag=" << (r.is_dag ? "true" : "false") << " edges=" << r.b_thresholded.sum()
                << " h=" << format_double(r.h_final) << " seconds=" << r.wall_time_seconds << "\n";
    } else if (e->parsed()) {
      const EvalReport r = cmd_eval(ev);
      std::cout << eval_csv_header() << "\n" << eval_csv_row(r) << "\n";
    } else if (c->parsed()) {
      cmd_cycle_study(cs);
    } else if (b->parsed()) {
      if (!dims.empty()) bo.dims = parse_dims(dims);
      std::cout << bench_csv(cmd_bench_h(bo));
    }
  } catch (const CLI::ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return usage;
  } catch (const Error& err) {
    std::cerr << "error [" << to_string(err.code()) << "]: " << err.what() << "\n";
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return io_failure;
  }
  return ok;
}

}  // namespace dagma::cli
