// rstc: synthetic data, clustering runs, standalone transport solves and
// evaluation from the command line.

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rstc/config.hpp"
#include "rstc/dataset.hpp"
#include "rstc/errors.hpp"
#include "rstc/metrics.hpp"
#include "rstc/report.hpp"
#include "rstc/synth.hpp"
#include "rstc/trainer.hpp"
#include "rstc/transport.hpp"

namespace {

using rstc::DenseMatrix;

bool has_emb1_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string(magic, 4) == "EMB1";
}

// Comma- or whitespace-separated rows of numbers.
DenseMatrix read_matrix_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rstc::FormatError(rstc::FormatErrorKind::kIo, "cannot open " + path);
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(line);
    std::size_t count = 0;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        throw rstc::FormatError(rstc::FormatErrorKind::kMalformed,
                                path + ": not a number: '" + token + "'");
      }
      data.push_back(v);
      ++count;
    }
    if (count == 0) continue;
    if (rows > 0 && count != cols) {
      throw rstc::FormatError(rstc::FormatErrorKind::kMalformed,
                              path + ": ragged row " + std::to_string(rows + 1));
    }
    cols = count;
    ++rows;
  }
  return DenseMatrix(rows, cols, std::move(data));
}

DenseMatrix read_predictions(const std::string& path) {
  if (has_emb1_magic(path)) return rstc::load_emb1(path).embeddings;
  return read_matrix_text(path);
}

// An assignment file, or an EMB1 file carrying labels.
std::vector<std::size_t> read_labels(const std::string& path) {
  if (!has_emb1_magic(path)) return rstc::read_assignments(path);
  auto dataset = rstc::load_emb1(path);
  if (!dataset.labels) {
    throw rstc::FormatError(rstc::FormatErrorKind::kMalformed, path + ": EMB1 has no labels");
  }
  return *dataset.labels;
}

nlohmann::json matrix_json(const DenseMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

int run_synth(const rstc::SynthConfig& cfg, const std::string& out) {
  const auto dataset = rstc::synth_generate(cfg);
  rstc::save_emb1(dataset, out);
  std::printf("wrote %zu x %zu embeddings, %zu classes -> %s\n", dataset.size(), dataset.dim(),
              cfg.num_classes, out.c_str());
  return 0;
}

struct ClusterArgs {
  std::string data;
  std::size_t classes = 0;
  std::string config;
  std::string out_assignments;
  std::string out_report;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_steps;
};

int run_cluster(const ClusterArgs& args) {
  const auto dataset = rstc::load_emb1(args.data);
  rstc::TrainConfig cfg = args.config.empty() ? rstc::TrainConfig{}
                                              : rstc::load_train_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (args.max_steps) cfg.max_steps = *args.max_steps;
  const auto report = rstc::run_rstc(dataset, args.classes, cfg);
  rstc::write_assignments(report.assignments, args.out_assignments);
  if (!args.out_report.empty()) rstc::write_report_csv(report, args.out_report);
  const auto& last = report.records.back();
  std::printf("steps %zu, refreshes %zu, clusters %zu%s\n", report.steps_run,
              report.records.size() - 1, last.clusters,
              report.stopped_early ? ", stopped on delta" : "");
  if (last.acc) std::printf("ACC %.4f NMI %.4f\n", *last.acc, *last.nmi);
  return 0;
}

struct SolveArgs {
  std::string predictions;
  std::string mode = "saot";
  double epsilon1 = 0.1;
  double epsilon2 = 0.1;
  double mu = 0.9;
  std::size_t iters = 1000;
  std::string out;
};

int run_solve_ot(const SolveArgs& args) {
  const DenseMatrix p = read_predictions(args.predictions);
  const auto cost = rstc::cost_from_predictions(p);
  const auto a = rstc::ProbVector::uniform(p.rows());
  const auto uniform_b = rstc::ProbVector::uniform(p.cols());
  rstc::SaotConfig cfg;
  cfg.epsilon1 = args.epsilon1;
  cfg.epsilon2 = args.epsilon2;

  rstc::SaotSolution solution;
  std::vector<double> reference;
  switch (rstc::parse_ot_mode(args.mode)) {
    case rstc::OtMode::kSaot:
      solution = rstc::solve_saot(cost, a, cfg, uniform_b);
      break;
    case rstc::OtMode::kKl: {
      cfg.penalty = rstc::MarginalPenalty::kKlToPrevious;
      solution = rstc::solve_saot(cost, a, cfg, uniform_b);
      const auto v = uniform_b.values();
      reference.assign(v.begin(), v.end());
      break;
    }
    case rstc::OtMode::kFixed:
      solution = rstc::solve_fixed_marginal_ot(cost, a, uniform_b, cfg.epsilon1, args.iters);
      break;
    case rstc::OtMode::kMovingAverage: {
      const auto b = rstc::estimate_marginal_moving_average(p, {uniform_b, args.mu});
      solution = rstc::solve_fixed_marginal_ot(cost, a, b, cfg.epsilon1, args.iters);
      break;
    }
  }
  const auto b = solution.marginal.values();
  nlohmann::json out;
  out["mode"] = args.mode;
  out["epsilon1"] = args.epsilon1;
  out["epsilon2"] = args.epsilon2;
  out["plan"] = matrix_json(solution.plan);
  out["marginal"] = std::vector<double>(b.begin(), b.end());
  out["objective"] = solution.objective;
  out["f"] = solution.f;
  std::vector<nlohmann::json> g;
  for (double v : solution.g) g.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json());
  out["g"] = g;
  out["h"] = solution.h;
  out["outer_iters_used"] = solution.outer_iters_used;
  out["row_residual"] = solution.diagnostics.row_residual;
  out["column_residual"] = solution.diagnostics.column_residual;
  out["converged"] = solution.diagnostics.converged;
  out["clamp_events"] = solution.diagnostics.clamp_events;
  const std::string text = out.dump(2) + "\n";
  if (args.out.empty() || args.out == "-") {
    std::fputs(text.c_str(), stdout);
  } else {
    rstc::write_text_file(args.out, text);
  }
  return 0;
}

int run_eval(const std::string& pred, const std::string& truth) {
  const auto y_pred = read_labels(pred);
  const auto y_true = read_labels(truth);
  std::printf("ACC %.6f\nNMI %.6f\n", rstc::accuracy(y_true, y_pred), rstc::nmi(y_true, y_pred));
  return 0;
}

int run_curves(const std::string& report_path, const std::string& out) {
  const auto report = rstc::read_report_csv(report_path);
  if (out.empty() || out == "-") {
    std::fputs(rstc::format_report_csv(report).c_str(), stdout);
  } else {
    rstc::write_report_csv(report, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSTC clustering toolkit: self-adaptive OT pseudo-labels over frozen embeddings"};
  app.require_subcommand(1);

  rstc::SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian mixture as EMB1");
  synth->add_option("--classes", synth_cfg.num_classes, "Number of clusters")->capture_default_str();
  synth->add_option("--n", synth_cfg.num_samples, "Number of samples")->capture_default_str();
  synth->add_option("--dim", synth_cfg.dim, "Structured dimensions")->capture_default_str();
  synth->add_option("--ratio", synth_cfg.imbalance_ratio, "Largest/smallest cluster size")
      ->capture_default_str();
  synth->add_option("--separation", synth_cfg.separation,
                    "Centroid distance in units of sqrt(dim) std")
      ->capture_default_str();
  synth->add_option("--noise-dims", synth_cfg.noise_dims, "Pure-noise dimensions appended")
      ->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output EMB1 file")->required();

  ClusterArgs cluster_args;
  auto* cluster = app.add_subcommand("cluster", "Run the full clustering loop");
  cluster->add_option("--data", cluster_args.data, "Input EMB1 file")->required()->check(
      CLI::ExistingFile);
  cluster->add_option("--classes", cluster_args.classes, "Number of clusters")->required();
  cluster->add_option("--config", cluster_args.config, "key=value configuration file")
      ->check(CLI::ExistingFile);
  cluster->add_option("--out-assignments", cluster_args.out_assignments,
                      "Output file, one label per line")
      ->required();
  cluster->add_option("--out-report", cluster_args.out_report, "Per-refresh CSV report");
  cluster->add_option("--seed", cluster_args.seed, "Overrides the configured seed");
  cluster->add_option("--max-steps", cluster_args.max_steps, "Overrides the configured budget");

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve-ot", "Solve transport on a stored prediction matrix");
  solve->add_option("--predictions", solve_args.predictions,
                    "Row-stochastic matrix: EMB1 (embeddings block) or CSV")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--mode", solve_args.mode, "saot|fixed|ma|kl")
      ->check(CLI::IsMember({"saot", "fixed", "ma", "kl"}))
      ->capture_default_str();
  solve->add_option("--epsilon1", solve_args.epsilon1, "Entropy weight")->capture_default_str();
  solve->add_option("--epsilon2", solve_args.epsilon2, "Marginal penalty weight")
      ->capture_default_str();
  solve->add_option("--mu", solve_args.mu, "Moving-average weight for --mode ma")
      ->capture_default_str();
  solve->add_option("--iters", solve_args.iters, "Sinkhorn sweeps for fixed-marginal modes")
      ->capture_default_str();
  solve->add_option("--out", solve_args.out, "Output JSON file ('-' for stdout)");

  std::string eval_pred;
  std::string eval_truth;
  auto* eval = app.add_subcommand("eval", "Print ACC and NMI of predicted labels");
  eval->add_option("--pred", eval_pred, "Assignment file or labelled EMB1")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_truth, "Assignment file or labelled EMB1")
      ->required()
      ->check(CLI::ExistingFile);

  std::string curves_report;
  std::string curves_out;
  auto* curves = app.add_subcommand("curves", "Re-emit a report's per-refresh curves as CSV");
  curves->add_option("--report", curves_report, "Report CSV from cluster")
      ->required()
      ->check(CLI::ExistingFile);
  curves->add_option("--out", curves_out, "Output CSV ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(synth_cfg, synth_out);
    if (cluster->parsed()) return run_cluster(cluster_args);
    if (solve->parsed()) return run_solve_ot(solve_args);
    if (eval->parsed()) return run_eval(eval_pred, eval_truth);
    if (curves->parsed()) return run_curves(curves_report, curves_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rstc: %s\n", e.what());
    return 1;
  }
  return 1;
}
