// dbalign: generate planted database pairs, canonicalize models, run MAP and
// threshold alignment, and drive reproducible sweeps.
//
// Exit codes: 0 success, 2 validation/usage error, 1 runtime error.

#include "dbalign/align.hpp"
#include "dbalign/error.hpp"
#include "dbalign/harness.hpp"
#include "dbalign/io.hpp"
#include "dbalign/measures.hpp"
#include "dbalign/synth.hpp"
#include "dbalign/theory.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace dbalign;
using nlohmann::json;

namespace {

struct ModelFlags {
  std::vector<double> rho;
  std::optional<std::size_t> d;
  std::string model_path;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--rho", rho, "correlation; with --d a constant model, otherwise a comma list")
        ->delimiter(',');
    cmd->add_option("--d", d, "number of coordinates for a constant --rho");
    cmd->add_option("--model", model_path, "general or canonical model JSON file");
  }

  bool has_general() const { return !model_path.empty(); }

  CorrelationModel general() const { return io::load_model_file(model_path); }

  CanonicalModel canonical() const {
    if (has_general()) {
      if (!rho.empty()) throw Error(ErrorKind::InvalidArgument, "--rho and --model are mutually exclusive");
      return canonicalize(general()).model;
    }
    if (rho.empty()) throw Error(ErrorKind::InvalidArgument, "one of --rho or --model is required");
    if (d) {
      if (rho.size() != 1) throw Error(ErrorKind::InvalidArgument, "--d needs a single --rho value");
      return CanonicalModel::constant(rho[0], *d);
    }
    return CanonicalModel(rho);
  }
};

struct LoadedPair {
  DatabasePair databases;
  CanonicalModel model;
};

LoadedPair load_pair(const std::string& a_path, const std::string& b_path, const ModelFlags& flags) {
  auto a = io::read_database_csv(a_path);
  auto b = io::read_database_csv(b_path);
  LoadedPair out;
  out.databases.users_a = std::move(a.ids);
  out.databases.users_b = std::move(b.ids);
  if (flags.has_general()) {
    const auto canon = canonicalize(flags.general());
    out.model = canon.model;
    out.databases.a = apply_transform(canon.transform_a, a.rows);
    out.databases.b = apply_transform(canon.transform_b, b.rows);
  } else {
    out.model = flags.canonical();
    out.databases.a = std::move(a.rows);
    out.databases.b = std::move(b.rows);
  }
  out.databases.validate();
  return out;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

void finish_report(AlignmentReport& report, const std::string& truth_path,
                   const std::string& out_dir) {
  if (!truth_path.empty()) {
    report.truth = io::read_matching_csv(truth_path, true);
    const ErrorCounts e = score_alignment(report.predicted, *report.truth);
    report.false_negatives = e.false_negatives;
    report.false_positives = e.false_positives;
    report.exact = e.exact;
  }
  const json j = io::report_to_json(report);
  if (!out_dir.empty()) {
    io::write_matching_csv(fs::path(out_dir) / "predicted.csv", report.predicted);
    io::write_text(fs::path(out_dir) / "report.json", j.dump(2) + "\n");
  }
  print_json(j);
}

void print_cells(const std::vector<SweepCell>& cells) {
  std::cout << "n\td\tI/ln n\ttau\tmap_success\tbht_fn\tbht_fp\tmap_verdict\n";
  for (const auto& c : cells) {
    std::cout << c.n << '\t' << c.d << '\t' << io::format_double(c.info_ratio) << '\t' << c.tau << '\t'
              << c.map_success_rate << '\t' << c.bht_mean_fn << '\t' << c.bht_mean_fp << '\t' << c.map_verdict
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian database alignment: MAP and log-likelihood-ratio threshold estimators"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> d_list;
  std::string out_dir;
  std::string a_path, b_path, truth_path;
  std::optional<double> tau;
  std::optional<double> eps_fn, eps_fp;
  std::size_t trials = 0;
  std::size_t threads = 0;
  std::string config_path, algorithm, tau_policy, in_dir, kind = "auto";
  std::vector<double> tau_grid;
  double drop_tolerance = kDefaultDropTolerance;
  bool no_reports = false;

  // generate
  ModelFlags gen_model;
  auto* gen = app.add_subcommand("generate", "sample a planted database pair");
  gen->add_option("--n", n, "number of users")->required();
  gen_model.add_to(gen);
  gen->add_option("--seed", seed, "master seed (trial 0 is used)");
  gen->add_option("--out", out_dir, "output directory")->required();

  // canonicalize
  ModelFlags canon_model;
  auto* canon = app.add_subcommand("canonicalize", "reduce a model to canonical correlations");
  canon->add_option("--model", canon_model.model_path, "model JSON file")->required();
  canon->add_option("--drop-tolerance", drop_tolerance, "discard singular values at or below this");
  canon->add_option("--out", out_dir, "also write canonical.json here");

  // align-map
  ModelFlags map_model;
  auto* amap = app.add_subcommand("align-map", "MAP alignment via maximum-weight matching");
  amap->add_option("--a", a_path, "database A CSV")->required();
  amap->add_option("--b", b_path, "database B CSV")->required();
  map_model.add_to(amap);
  amap->add_option("--truth", truth_path, "ground-truth matching CSV");
  amap->add_option("--out", out_dir, "write predicted.csv and report.json here");

  // align-bht
  ModelFlags bht_model;
  auto* abht = app.add_subcommand("align-bht", "partial alignment by LLR thresholding");
  abht->add_option("--a", a_path, "database A CSV")->required();
  abht->add_option("--b", b_path, "database B CSV")->required();
  bht_model.add_to(abht);
  abht->add_option("--tau", tau, "explicit threshold");
  abht->add_option("--eps-fn", eps_fn, "false-negative budget for the threshold window");
  abht->add_option("--eps-fp", eps_fp, "false-positive budget for the threshold window");
  abht->add_option("--truth", truth_path, "ground-truth matching CSV");
  abht->add_option("--out", out_dir, "write predicted.csv and report.json here");

  // sweep
  std::vector<double> sweep_rho;
  std::string sweep_model;
  auto* sw = app.add_subcommand("sweep", "run a phase-transition sweep");
  sw->add_option("--config", config_path, "sweep config JSON");
  sw->add_option("--n", n_list, "user counts")->delimiter(',');
  sw->add_option("--rho", sweep_rho, "constant rho (with --d) or a rho vector")->delimiter(',');
  sw->add_option("--d", d_list, "coordinate counts for constant rho")->delimiter(',');
  sw->add_option("--model", sweep_model, "model JSON file");
  sw->add_option("--algorithm", algorithm, "map | bht | both");
  sw->add_option("--tau-policy", tau_policy, "window | explicit | grid");
  sw->add_option("--tau", tau_grid, "threshold(s)")->delimiter(',');
  sw->add_option("--eps-fn", eps_fn, "false-negative budget");
  sw->add_option("--eps-fp", eps_fp, "false-positive budget");
  sw->add_option("--trials", trials, "trials per cell");
  sw->add_option("--seed", seed, "master seed");
  sw->add_option("--threads", threads, "worker threads");
  sw->add_option("--out", out_dir, "output directory");
  sw->add_flag("--no-reports", no_reports, "skip per-trial report JSON files");

  // report
  auto* rep = app.add_subcommand("report", "summarise cells.csv and redraw the plot");
  rep->add_option("--in", in_dir, "sweep output directory")->required();
  rep->add_option("--kind", kind, "success | errors | auto");
  rep->add_option("--out", out_dir, "plot path (default <in>/plot.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const TrialSeed trial_seed = derive_trial_seed(seed, 0);
      PlantedInstance inst = gen_model.has_general()
                                 ? sample_general_instance(n, gen_model.general(), trial_seed)
                                 : sample_instance(n, gen_model.canonical(), trial_seed);
      const fs::path dir(out_dir);
      io::write_database_csv(dir / "a.csv", inst.databases.users_a, inst.databases.a);
      io::write_database_csv(dir / "b.csv", inst.databases.users_b, inst.databases.b);
      io::write_matching_csv(dir / "truth.csv", inst.truth);
      io::write_text(dir / "model.json", io::canonical_to_json(inst.model).dump() + "\n");
      print_json({{"n", n}, {"d", inst.model.dim()}, {"master_seed", seed}, {"trial_index", 0}, {"out", out_dir}});
    } else if (*canon) {
      const auto result = canonicalize(canon_model.general(), drop_tolerance);
      const CorrelationSummary s = summarize(result.model);
      const json j{{"rho", result.model.rho()}, {"I", s.mutual_information}, {"sigma", s.sigma}};
      if (!out_dir.empty()) io::write_text(fs::path(out_dir) / "canonical.json", j.dump(2) + "\n");
      print_json(j);
    } else if (*amap) {
      const LoadedPair pair = load_pair(a_path, b_path, map_model);
      const auto start = std::chrono::steady_clock::now();
      const ScoreMatrix scores = score_matrix(pair.databases, pair.model);
      const Assignment a = max_weight_assignment(scores.scores);
      AlignmentReport report;
      report.algorithm = "map";
      report.predicted = Matching::from_permutation(scores.users_a, scores.users_b, a.column_of_row);
      report.total_score = a.weight;
      report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      finish_report(report, truth_path, out_dir);
    } else if (*abht) {
      const LoadedPair pair = load_pair(a_path, b_path, bht_model);
      double threshold = 0.0;
      if (tau) {
        threshold = *tau;
      } else if (eps_fn && eps_fp) {
        const ThresholdWindow w =
            select_threshold(summarize(pair.model), pair.databases.size(), *eps_fn, *eps_fp);
        if (!w.feasible) {
          std::cerr << "threshold window is empty: lower " << w.lower << " exceeds upper " << w.upper << " by "
                    << w.gap << " nats\n";
          return 1;
        }
        threshold = w.tau;
      } else {
        std::cerr << "align-bht needs --tau or both --eps-fn and --eps-fp\n";
        return 2;
      }
      const auto start = std::chrono::steady_clock::now();
      const ScoreMatrix scores = score_matrix(pair.databases, pair.model);
      AlignmentReport report;
      report.algorithm = "bht";
      report.predicted = bht_align(scores, threshold);
      report.threshold = threshold;
      for (Eigen::Index i = 0; i < scores.scores.size(); ++i) {
        if (scores.scores.data()[i] >= threshold) report.total_score += scores.scores.data()[i];
      }
      report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      finish_report(report, truth_path, out_dir);
    } else if (*sw) {
      json cfg = config_path.empty() ? json::object() : json::parse(io::read_text(config_path));
      if (!n_list.empty()) cfg["n"] = n_list;
      if (!sweep_model.empty()) {
        cfg.erase("rho");
        cfg.erase("d");
        cfg["model"] = sweep_model;
      }
      if (!sweep_rho.empty()) {
        cfg.erase("model");
        if (!d_list.empty()) {
          if (sweep_rho.size() != 1) throw Error(ErrorKind::InvalidArgument, "--d needs a single --rho value");
          cfg["rho"] = sweep_rho[0];
          cfg["d"] = d_list;
        } else {
          cfg["rho"] = sweep_rho;
          cfg.erase("d");
        }
      } else if (!d_list.empty()) {
        cfg["d"] = d_list;
      }
      if (!algorithm.empty()) cfg["algorithm"] = algorithm;
      if (!tau_policy.empty()) cfg["tau_policy"] = tau_policy;
      if (!tau_grid.empty()) cfg["tau"] = tau_grid;
      if (eps_fn) cfg["eps_fn"] = *eps_fn;
      if (eps_fp) cfg["eps_fp"] = *eps_fp;
      if (trials) cfg["trials"] = trials;
      if (sw->count("--seed")) cfg["master_seed"] = seed;
      if (threads) cfg["threads"] = threads;
      if (!out_dir.empty()) cfg["output_dir"] = out_dir;
      if (no_reports) cfg["write_reports"] = false;
      const SweepConfig config = sweep_config_from_json(cfg);
      const SweepResult result = sweep(config);
      print_cells(result.cells);
    } else if (*rep) {
      const auto cells = cells_from_csv(io::read_text(fs::path(in_dir) / "cells.csv"));
      PlotKind plot_kind = PlotKind::SuccessVsInformation;
      if (kind == "errors") {
        plot_kind = PlotKind::ErrorsVsInformation;
      } else if (kind == "auto") {
        bool any_map = false;
        for (const auto& c : cells) any_map = any_map || std::isfinite(c.map_success_rate);
        if (!any_map) plot_kind = PlotKind::ErrorsVsInformation;
      } else if (kind != "success") {
        throw Error(ErrorKind::InvalidArgument, "--kind must be success, errors or auto");
      }
      const fs::path plot = out_dir.empty() ? fs::path(in_dir) / "plot.svg" : fs::path(out_dir);
      emit_plot(cells, plot_kind, plot);
      print_cells(cells);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.kind()) ? 2 : 1;
  } catch (const json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
