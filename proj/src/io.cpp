#include "dagma/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dagma/error.hpp"

namespace dagma {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const std::string& what) { throw Error(ErrorCode::io, what); }

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::invalid_config, what); }

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) io_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) io_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) io_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string to_csv(const Matrix& m) {
  std::string s;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) s += ',';
      s += format_double(m(i, j));
    }
    s += '\n';
  }
  return s;
}

void write_csv(const fs::path& path, const Matrix& m) { write_text_atomic(path, to_csv(m)); }

Matrix read_csv(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<double> values;
  Index rows = 0, cols = -1;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Index count = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      std::string cell = line.substr(pos, end - pos);
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      if (b == std::string::npos) io_error(path.string() + ": empty cell on row " + std::to_string(rows + 1));
      cell = cell.substr(b, e - b + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        io_error(path.string() + ": non-numeric cell '" + cell + "' on row " + std::to_string(rows + 1));
      values.push_back(v);
      ++count;
      if (end == line.size()) break;
      pos = end + 1;
    }
    if (cols >= 0 && count != cols) io_error(path.string() + ": ragged row " + std::to_string(rows + 1));
    cols = count;
    ++rows;
  }
  if (rows == 0) io_error(path.string() + ": no data");
  return Eigen::Map<Matrix>(values.data(), rows, cols);
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Adjacency& b) {
  Json rows = Json::array();
  for (Index i = 0; i < b.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < b.cols(); ++j) row.push_back(b(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) io_error("expected a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) io_error("ragged matrix in JSON");
    for (Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) io_error("non-numeric matrix entry in JSON");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Adjacency adjacency_from_json(const Json& j) {
  const Matrix m = matrix_from_json(j);
  if (((m.array() != 0.0) && (m.array() != 1.0)).any()) io_error("adjacency entries must be 0 or 1");
  return m.cast<int>();
}

Json to_json(const DagmaConfig& c) {
  Json j;
  j["model"] = std::string(to_string(c.model));
  j["T"] = c.T;
  j["mu0"] = c.mu0;
  j["alpha"] = c.alpha;
  j["beta1_l1"] = c.beta1_l1;
  j["s_schedule"] = c.s_schedule;
  j["inner_max_iters"] = c.inner_max_iters;
  j["lr"] = c.lr;
  j["adam_betas"] = {c.adam_beta1, c.adam_beta2};
  j["adam_eps"] = c.adam_eps;
  j["rel_tol"] = c.rel_tol;
  j["threshold"] = c.threshold;
  j["convergence_check_every"] = c.convergence_check_every;
  j["checkpoint_every"] = c.checkpoint_every;
  j["max_lr_halvings"] = c.max_lr_halvings;
  j["final_zero_mu_stage"] = c.final_zero_mu_stage;
  j["mlp_hidden"] = c.mlp_hidden;
  j["mlp_loss"] = c.mlp_loss == MlpLoss::log_likelihood ? "log_likelihood" : "least_squares";
  j["mlp_init_scale"] = c.mlp_init_scale;
  j["seed"] = c.seed;
  return j;
}

DagmaConfig config_from_json(const Json& j, ModelKind model) {
  if (!j.is_object()) config_error("config must be a JSON object");
  if (j.contains("model")) {
    const auto m = parse_model_kind(get_as<std::string>(j, "model"));
    if (!m) config_error("unknown model in config");
    model = *m;
  }
  DagmaConfig c = DagmaConfig::defaults(model);
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "model") continue;
    if (key == "T") c.T = get_as<int>(j, k);
    else if (key == "mu0") c.mu0 = get_as<double>(j, k);
    else if (key == "alpha") c.alpha = get_as<double>(j, k);
    else if (key == "beta1_l1") c.beta1_l1 = get_as<double>(j, k);
    else if (key == "s_schedule") c.s_schedule = get_as<std::vector<double>>(j, k);
    else if (key == "inner_max_iters") c.inner_max_iters = get_as<std::vector<int>>(j, k);
    else if (key == "lr") c.lr = get_as<double>(j, k);
    else if (key == "adam_betas") {
      const auto b = get_as<std::vector<double>>(j, k);
      if (b.size() != 2) config_error("adam_betas must have two entries");
      c.adam_beta1 = b[0];
      c.adam_beta2 = b[1];
    } else if (key == "adam_eps") c.adam_eps = get_as<double>(j, k);
    else if (key == "rel_tol") c.rel_tol = get_as<double>(j, k);
    else if (key == "threshold") c.threshold = get_as<double>(j, k);
    else if (key == "convergence_check_every") c.convergence_check_every = get_as<int>(j, k);
    else if (key == "checkpoint_every") c.checkpoint_every = get_as<int>(j, k);
    else if (key == "max_lr_halvings") c.max_lr_halvings = get_as<int>(j, k);
    else if (key == "final_zero_mu_stage") c.final_zero_mu_stage = get_as<bool>(j, k);
    else if (key == "mlp_hidden") c.mlp_hidden = get_as<Index>(j, k);
    else if (key == "mlp_loss") {
      const auto s = get_as<std::string>(j, k);
      if (s == "log_likelihood") c.mlp_loss = MlpLoss::log_likelihood;
      else if (s == "least_squares") c.mlp_loss = MlpLoss::least_squares;
      else config_error("mlp_loss must be log_likelihood or least_squares");
    } else if (key == "mlp_init_scale") c.mlp_init_scale = get_as<double>(j, k);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(j, k);
    else config_error("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

Json to_json(const FitResult& fit) {
  Json j;
  j["config"] = to_json(fit.config);
  j["seed"] = fit.config.seed;
  j["W_continuous"] = to_json(fit.w_continuous);
  j["B"] = to_json(fit.b_thresholded);
  j["is_dag"] = fit.is_dag;
  j["h_final"] = fit.h_final;
  j["stage_mu"] = fit.stage_mu;
  j["stage_converged"] = fit.stage_converged;
  Json trace = Json::array();
  for (const TraceRecord& r : fit.trace) {
    trace.push_back({{"stage", r.stage}, {"iteration", r.iteration}, {"mu", r.mu}, {"s", r.s},
                     {"score", r.score}, {"h", r.h}, {"l1", r.l1}, {"objective", r.objective},
                     {"lr", r.lr}});
  }
  j["trace"] = std::move(trace);
  j["warnings"] = fit.warnings;
  j["wall_time_seconds"] = fit.wall_time_seconds;
  return j;
}

Json to_json(const EvalReport& r) {
  return {{"shd", r.shd},         {"tpr", r.tpr},
          {"fpr", r.fpr},         {"fdr", r.fdr},
          {"true_edges", r.true_edges}, {"predicted_edges", r.predicted_edges},
          {"correct", r.correct}, {"reversed", r.reversed},
          {"missing", r.missing}, {"extra", r.extra}};
}

std::string eval_csv_header() {
  return "shd,tpr,fpr,fdr,true_edges,predicted_edges,correct,reversed,missing,extra";
}

std::string eval_csv_row(const EvalReport& r) {
  return std::to_string(r.shd) + ',' + format_double(r.tpr) + ',' + format_double(r.fpr) + ',' +
         format_double(r.fdr) + ',' + std::to_string(r.true_edges) + ',' +
         std::to_string(r.predicted_edges) + ',' + std::to_string(r.correct) + ',' +
         std::to_string(r.reversed) + ',' + std::to_string(r.missing) + ',' + std::to_string(r.extra);
}

Json to_json(const GroundTruth& t) {
  Json j;
  j["d"] = t.binary.rows();
  j["family"] = std::string(to_string(t.spec.graph));
  j["k"] = t.spec.k;
  j["model"] = std::string(to_string(t.spec.model));
  j["noise"] = std::string(to_string(t.spec.noise));
  j["n"] = t.spec.n;
  j["seed"] = t.spec.seed;
  j["binary"] = to_json(t.binary);
  j["weights"] = to_json(t.weights);
  return j;
}

GroundTruth truth_from_json(const Json& j) {
  GroundTruth t;
  try {
    t.binary = adjacency_from_json(j.at("binary"));
    t.weights = j.contains("weights") ? matrix_from_json(j.at("weights")) : t.binary.cast<double>();
    if (j.contains("family")) {
      if (auto g = parse_graph_family(j.at("family").get<std::string>())) t.spec.graph = *g;
    }
    if (j.contains("model")) {
      if (auto m = parse_sem_family(j.at("model").get<std::string>())) t.spec.model = *m;
    }
    if (j.contains("noise")) {
      if (auto n = parse_noise_kind(j.at("noise").get<std::string>())) t.spec.noise = *n;
    }
    if (j.contains("k")) t.spec.k = j.at("k").get<double>();
    if (j.contains("n")) t.spec.n = j.at("n").get<Index>();
    if (j.contains("seed")) t.spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    io_error(std::string("malformed truth JSON: ") + e.what());
  }
  t.spec.d = t.binary.rows();
  if (t.binary.rows() != t.binary.cols()) io_error("truth adjacency must be square");
  return t;
}

Json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    io_error(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

}  // namespace dagma
