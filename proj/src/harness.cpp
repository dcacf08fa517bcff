#include "dbalign/harness.hpp"

#include "dbalign/error.hpp"
#include "dbalign/io.hpp"
#include "dbalign/measures.hpp"
#include "dbalign/synth.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace dbalign {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Map: return "map";
    case Algorithm::Bht: return "bht";
    case Algorithm::Both: return "both";
  }
  return "map";
}

std::string_view to_string(TauPolicy p) {
  switch (p) {
    case TauPolicy::WindowMidpoint: return "window";
    case TauPolicy::Explicit: return "explicit";
    case TauPolicy::Grid: return "grid";
  }
  return "window";
}

void SweepConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (n_values.empty()) fail("at least one n is required");
  for (auto n : n_values) {
    if (n < 1) fail("n must be >= 1");
  }
  if (trials < 1) fail("trials must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  const int sources = (rho.constant ? 1 : 0) + (rho.explicit_rho.empty() ? 0 : 1) + (rho.model_path.empty() ? 0 : 1);
  if (sources != 1) fail("exactly one of constant rho, explicit rho vector or model file is required");
  if (rho.constant && rho.d_values.empty()) fail("constant rho needs at least one d");
  if (algorithm != Algorithm::Map) {
    if (tau_policy == TauPolicy::Explicit && tau_values.size() != 1) fail("explicit tau policy needs one tau");
    if (tau_policy == TauPolicy::Grid && tau_values.empty()) fail("tau grid must be non-empty");
    if (tau_policy == TauPolicy::WindowMidpoint && (!(eps_fn > 0.0) || !(eps_fp > 0.0))) {
      fail("eps_fn and eps_fp must be positive");
    }
    for (double t : tau_values) {
      if (!std::isfinite(t)) fail("tau must be finite");
    }
  }
}

namespace {

template <typename T>
std::vector<T> scalar_or_array(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "map") return Algorithm::Map;
  if (s == "bht") return Algorithm::Bht;
  if (s == "both") return Algorithm::Both;
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + s + "'");
}

TauPolicy parse_tau_policy(const std::string& s) {
  if (s == "window") return TauPolicy::WindowMidpoint;
  if (s == "explicit") return TauPolicy::Explicit;
  if (s == "grid") return TauPolicy::Grid;
  throw Error(ErrorKind::InvalidArgument, "unknown tau policy '" + s + "'");
}

}  // namespace

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig c;
  try {
    c.n_values = scalar_or_array<std::size_t>(j.at("n"));
    if (j.contains("model")) {
      c.rho.model_path = j.at("model").get<std::string>();
    } else if (j.at("rho").is_array()) {
      c.rho.explicit_rho = j.at("rho").get<std::vector<double>>();
    } else {
      c.rho.constant = j.at("rho").get<double>();
      c.rho.d_values = scalar_or_array<std::size_t>(j.at("d"));
    }
    c.algorithm = parse_algorithm(j.value("algorithm", std::string("map")));
    c.tau_policy = parse_tau_policy(j.value("tau_policy", std::string("window")));
    if (j.contains("tau")) c.tau_values = scalar_or_array<double>(j.at("tau"));
    c.eps_fn = j.value("eps_fn", 1.0);
    c.eps_fp = j.value("eps_fp", 1.0);
    c.trials = j.value("trials", std::size_t{1});
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    c.output_dir = j.value("output_dir", std::string());
    c.threads = j.value("threads", std::size_t{1});
    c.write_reports = j.value("write_reports", true);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

json sweep_config_to_json(const SweepConfig& c) {
  json j{{"n", c.n_values},
         {"algorithm", to_string(c.algorithm)},
         {"tau_policy", to_string(c.tau_policy)},
         {"tau", c.tau_values},
         {"eps_fn", c.eps_fn},
         {"eps_fp", c.eps_fp},
         {"trials", c.trials},
         {"master_seed", c.master_seed},
         {"output_dir", c.output_dir},
         {"threads", c.threads},
         {"write_reports", c.write_reports}};
  if (c.rho.constant) {
    j["rho"] = *c.rho.constant;
    j["d"] = c.rho.d_values;
  } else if (!c.rho.explicit_rho.empty()) {
    j["rho"] = c.rho.explicit_rho;
  } else {
    j["model"] = c.rho.model_path;
  }
  return j;
}

TrialOutcome run_trial(const CellSpec& cell, std::size_t trial_index) {
  TrialOutcome out;
  out.trial_index = trial_index;
  const TrialSeed seed = derive_trial_seed(cell.master_seed, trial_index);
  try {
    const auto start = std::chrono::steady_clock::now();
    const PlantedInstance inst = sample_instance(cell.n, cell.model, seed);
    const ScoreMatrix scores = score_matrix(inst.databases, inst.model);
    const auto setup = std::chrono::steady_clock::now() - start;

    auto base_report = [&](const char* algorithm) {
      AlignmentReport r;
      r.algorithm = algorithm;
      r.seed = seed;
      if (cell.keep_matchings) r.truth = inst.truth;
      return r;
    };

    if (cell.algorithm != Algorithm::Bht) {
      const auto t0 = std::chrono::steady_clock::now();
      const Assignment a = max_weight_assignment(scores.scores);
      const ErrorCounts e = score_assignment(a.column_of_row, inst.truth_permutation);
      AlignmentReport r = base_report("map");
      if (cell.keep_matchings) {
        r.predicted = Matching::from_permutation(scores.users_a, scores.users_b, a.column_of_row);
      } else {
        r.predicted.bijective = true;
      }
      r.false_negatives = e.false_negatives;
      r.false_positives = e.false_positives;
      r.exact = e.exact;
      r.total_score = a.weight;
      r.wall_time_seconds = std::chrono::duration<double>(setup + (std::chrono::steady_clock::now() - t0)).count();
      out.map = std::move(r);
    }
    if (cell.algorithm != Algorithm::Map) {
      for (double tau : cell.taus) {
        const auto t0 = std::chrono::steady_clock::now();
        const ErrorCounts e = score_threshold(scores.scores, tau, inst.truth_permutation);
        AlignmentReport r = base_report("bht");
        if (cell.keep_matchings) r.predicted = bht_align(scores, tau);
        double accepted = 0.0;
        for (Eigen::Index i = 0; i < scores.scores.size(); ++i) {
          const double s = scores.scores.data()[i];
          if (s >= tau) accepted += s;
        }
        r.false_negatives = e.false_negatives;
        r.false_positives = e.false_positives;
        r.exact = e.exact;
        r.total_score = accepted;
        r.threshold = tau;
        r.wall_time_seconds =
            std::chrono::duration<double>(setup + (std::chrono::steady_clock::now() - t0)).count();
        out.bht.push_back(std::move(r));
      }
    }
  } catch (const Error& e) {
    out.error = e.what();
    out.map.reset();
    out.bht.clear();
  }
  return out;
}

double rate_halfwidth(double p, std::size_t trials) {
  if (trials == 0) return 0.0;
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double t_quantile_975(std::size_t dof) {
  if (dof == 0) return std::numeric_limits<double>::infinity();
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ModelEntry {
  CanonicalModel model;
  std::string rho_label;
};

std::vector<ModelEntry> expand_models(const RhoSpec& spec) {
  std::vector<ModelEntry> out;
  if (spec.constant) {
    for (auto d : spec.d_values) out.push_back({CanonicalModel::constant(*spec.constant, d), io::format_double(*spec.constant)});
  } else {
    CanonicalModel model = spec.explicit_rho.empty() ? canonicalize(io::load_model_file(spec.model_path)).model
                                                     : CanonicalModel(spec.explicit_rho);
    std::string label;
    for (std::size_t i = 0; i < model.rho().size(); ++i) {
      if (i) label += ';';
      label += io::format_double(model.rho()[i]);
    }
    out.push_back({std::move(model), std::move(label)});
  }
  return out;
}

struct Group {
  CellSpec spec;
  std::string rho_label;
  ThresholdWindow window;
};

struct MeanStats {
  double mean = kNaN;
  double stderr_ = kNaN;
};

MeanStats mean_stats(const std::vector<double>& xs) {
  MeanStats s;
  if (xs.empty()) return s;
  const double k = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / k;
  if (xs.size() < 2) {
    s.stderr_ = 0.0;
    return s;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stderr_ = std::sqrt(ss / (k - 1.0) / k);
  return s;
}

std::vector<Group> build_groups(const SweepConfig& config) {
  const auto models = expand_models(config.rho);
  std::vector<Group> groups;
  for (auto n : config.n_values) {
    for (const auto& entry : models) {
      Group g;
      g.spec.n = n;
      g.spec.model = entry.model;
      g.spec.algorithm = config.algorithm;
      g.spec.master_seed = config.master_seed;
      g.spec.keep_matchings = config.write_reports;
      g.rho_label = entry.rho_label;
      g.window = bht_threshold_window(summarize(entry.model), n, config.eps_fn, config.eps_fp);
      if (config.algorithm != Algorithm::Map) {
        switch (config.tau_policy) {
          case TauPolicy::WindowMidpoint:
            if (g.window.feasible) g.spec.taus = {g.window.tau};
            break;
          case TauPolicy::Explicit:
          case TauPolicy::Grid:
            g.spec.taus = config.tau_values;
            break;
        }
      }
      groups.push_back(std::move(g));
    }
  }
  return groups;
}

SweepCell base_cell(const Group& g, std::size_t trials) {
  SweepCell c;
  c.n = g.spec.n;
  c.d = g.spec.model.dim();
  c.rho = g.rho_label;
  const CorrelationSummary summary = summarize(g.spec.model);
  c.mutual_information = summary.mutual_information;
  c.sigma = summary.sigma;
  const double log_n = std::log(static_cast<double>(c.n));
  c.info_ratio = c.n > 1 ? summary.mutual_information / log_n : kNaN;
  c.tau = kNaN;
  c.trials = trials;
  c.map_success_rate = c.map_success_halfwidth = c.map_mean_errors = kNaN;
  c.bht_mean_fn = c.bht_fn_stderr = c.bht_fn_halfwidth = kNaN;
  c.bht_mean_fp = c.bht_fp_stderr = c.bht_fp_halfwidth = c.bht_total_stderr = kNaN;
  if (c.n >= 2) {
    const RegimeVerdict ach = map_achievability_margin(g.spec.model, c.n);
    const RegimeVerdict conv = map_converse_from_information(summary.mutual_information, c.n);
    c.map_verdict = std::string(to_string(ach.verdict));
    c.map_margin = ach.margin;
    c.converse_verdict = std::string(to_string(conv.verdict));
    c.converse_margin = conv.margin;
    c.bht_converse_bound = bht_converse_bound(summary.mutual_information, c.n);
  } else {
    c.map_verdict = c.converse_verdict = "gap";
    c.map_margin = c.converse_margin = c.bht_converse_bound = kNaN;
  }
  c.bht_feasible = g.window.feasible;
  c.bht_window_lower = g.window.lower;
  c.bht_window_upper = g.window.upper;
  return c;
}

std::vector<SweepCell> aggregate(const std::vector<Group>& groups,
                                 const std::vector<std::vector<TrialOutcome>>& outcomes, std::size_t trials) {
  std::vector<SweepCell> cells;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& g = groups[gi];
    const auto& trial_outcomes = outcomes[gi];
    SweepCell proto = base_cell(g, trials);
    for (const auto& o : trial_outcomes) proto.failed_trials += o.error ? 1 : 0;

    if (g.spec.algorithm != Algorithm::Bht) {
      std::size_t ok = 0, exact = 0;
      double errors = 0.0;
      for (const auto& o : trial_outcomes) {
        if (!o.map) continue;
        ++ok;
        exact += o.map->exact ? 1 : 0;
        errors += static_cast<double>(o.map->false_negatives);
      }
      if (ok > 0) {
        proto.map_success_rate = static_cast<double>(exact) / static_cast<double>(ok);
        proto.map_success_halfwidth = rate_halfwidth(proto.map_success_rate, ok);
        proto.map_mean_errors = errors / static_cast<double>(ok);
      }
    }

    if (g.spec.algorithm == Algorithm::Map || g.spec.taus.empty()) {
      cells.push_back(proto);
      continue;
    }
    for (std::size_t ti = 0; ti < g.spec.taus.size(); ++ti) {
      SweepCell c = proto;
      c.tau = g.spec.taus[ti];
      std::vector<double> fn, fp, total;
      for (const auto& o : trial_outcomes) {
        if (o.bht.size() <= ti) continue;
        fn.push_back(static_cast<double>(o.bht[ti].false_negatives));
        fp.push_back(static_cast<double>(o.bht[ti].false_positives));
        total.push_back(fn.back() + fp.back());
      }
      const MeanStats sfn = mean_stats(fn), sfp = mean_stats(fp), stot = mean_stats(total);
      const double t = fn.size() >= 2 ? t_quantile_975(fn.size() - 1) : kNaN;
      c.bht_mean_fn = sfn.mean;
      c.bht_fn_stderr = sfn.stderr_;
      c.bht_fn_halfwidth = t * sfn.stderr_;
      c.bht_mean_fp = sfp.mean;
      c.bht_fp_stderr = sfp.stderr_;
      c.bht_fp_halfwidth = t * sfp.stderr_;
      c.bht_total_stderr = stot.stderr_;
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<Group> groups = build_groups(config);

  struct Job {
    std::size_t group;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t t = 0; t < config.trials; ++t) jobs.push_back({g, t});
  }

  SweepResult result;
  result.outcomes.assign(groups.size(), std::vector<TrialOutcome>(config.trials));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < jobs.size(); k = next.fetch_add(1)) {
      const Job& job = jobs[k];
      result.outcomes[job.group][job.trial] = run_trial(groups[job.group].spec, job.trial);
    }
  };
  const std::size_t workers = std::min(config.threads, std::max<std::size_t>(jobs.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  result.cells = aggregate(groups, result.outcomes, config.trials);
  return result;
}

SweepResult sweep(const SweepConfig& config) {
  if (config.output_dir.empty()) throw Error(ErrorKind::IoError, "output directory is required");
  const fs::path out_dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string());

  SweepResult result = run_sweep(config);

  io::write_text(out_dir / "cells.csv", cells_to_csv(result.cells));

  json summary{{"config", sweep_config_to_json(config)},
               {"generator", {{"rng", kRngName}, {"gaussian", kGaussianMethod}}},
               {"cells", json::array()}};
  for (const auto& c : result.cells) {
    summary["cells"].push_back({{"n", c.n},
                                {"d", c.d},
                                {"rho", c.rho},
                                {"mutual_information", c.mutual_information},
                                {"sigma", c.sigma},
                                {"info_ratio", c.info_ratio},
                                {"map_success_rate", c.map_success_rate},
                                {"bht_mean_fn", c.bht_mean_fn},
                                {"bht_mean_fp", c.bht_mean_fp},
                                {"map_verdict", c.map_verdict},
                                {"converse_verdict", c.converse_verdict}});
  }
  io::write_text(out_dir / "sweep.json", summary.dump(2) + "\n");

  if (config.write_reports) {
    const fs::path reports = out_dir / "reports";
    fs::create_directories(reports, ec);
    for (std::size_t g = 0; g < result.outcomes.size(); ++g) {
      for (const auto& o : result.outcomes[g]) {
        json j{{"group", g}, {"trial_index", o.trial_index}};
        j["map"] = o.map ? io::report_to_json(*o.map) : json(nullptr);
        j["bht"] = json::array();
        for (const auto& r : o.bht) j["bht"].push_back(io::report_to_json(r));
        j["error"] = o.error ? json(*o.error) : json(nullptr);
        io::write_text(reports / ("g" + std::to_string(g) + "_t" + std::to_string(o.trial_index) + ".json"),
                       j.dump(2) + "\n");
      }
    }
  }

  const PlotKind kind = config.algorithm == Algorithm::Bht ? PlotKind::ErrorsVsInformation
                                                           : PlotKind::SuccessVsInformation;
  emit_plot(result.cells, kind, out_dir / "plot.svg");
  return result;
}

namespace {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "n", "d", "rho", "mutual_information", "sigma", "info_ratio", "tau", "trials", "failed_trials",
      "map_success_rate", "map_success_halfwidth", "map_mean_errors", "bht_mean_fn", "bht_fn_stderr",
      "bht_fn_halfwidth", "bht_mean_fp", "bht_fp_stderr", "bht_fp_halfwidth", "bht_total_stderr",
      "map_verdict", "map_margin", "converse_verdict", "converse_margin", "bht_feasible",
      "bht_window_lower", "bht_window_upper", "bht_converse_bound"};
  return cols;
}

double parse_number(const std::string& s) {
  if (s == "nan") return kNaN;
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "cells.csv: bad number '" + s + "'");
  }
}

std::string num(double x) { return std::isnan(x) ? "nan" : io::format_double(x); }

}  // namespace

std::string cells_to_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& c : cells) {
    out << c.n << ',' << c.d << ',' << c.rho << ',' << num(c.mutual_information) << ',' << num(c.sigma) << ','
        << num(c.info_ratio) << ',' << num(c.tau) << ',' << c.trials << ',' << c.failed_trials << ','
        << num(c.map_success_rate) << ',' << num(c.map_success_halfwidth) << ',' << num(c.map_mean_errors) << ','
        << num(c.bht_mean_fn) << ',' << num(c.bht_fn_stderr) << ',' << num(c.bht_fn_halfwidth) << ','
        << num(c.bht_mean_fp) << ',' << num(c.bht_fp_stderr) << ',' << num(c.bht_fp_halfwidth) << ','
        << num(c.bht_total_stderr) << ',' << c.map_verdict << ',' << num(c.map_margin) << ','
        << c.converse_verdict << ',' << num(c.converse_margin) << ',' << (c.bht_feasible ? "true" : "false")
        << ',' << num(c.bht_window_lower) << ',' << num(c.bht_window_upper) << ',' << num(c.bht_converse_bound)
        << '\n';
  }
  return out.str();
}

std::vector<SweepCell> cells_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "cells.csv is empty");
  const auto& cols = csv_columns();
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  if (header != cols) throw Error(ErrorKind::ParseError, "cells.csv header does not match the expected columns");

  std::vector<SweepCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) f.push_back(cell);
    if (f.size() != cols.size()) throw Error(ErrorKind::ParseError, "cells.csv row has wrong width");
    SweepCell c;
    std::size_t k = 0;
    c.n = static_cast<std::size_t>(parse_number(f[k++]));
    c.d = static_cast<std::size_t>(parse_number(f[k++]));
    c.rho = f[k++];
    c.mutual_information = parse_number(f[k++]);
    c.sigma = parse_number(f[k++]);
    c.info_ratio = parse_number(f[k++]);
    c.tau = parse_number(f[k++]);
    c.trials = static_cast<std::size_t>(parse_number(f[k++]));
    c.failed_trials = static_cast<std::size_t>(parse_number(f[k++]));
    c.map_success_rate = parse_number(f[k++]);
    c.map_success_halfwidth = parse_number(f[k++]);
    c.map_mean_errors = parse_number(f[k++]);
    c.bht_mean_fn = parse_number(f[k++]);
    c.bht_fn_stderr = parse_number(f[k++]);
    c.bht_fn_halfwidth = parse_number(f[k++]);
    c.bht_mean_fp = parse_number(f[k++]);
    c.bht_fp_stderr = parse_number(f[k++]);
    c.bht_fp_halfwidth = parse_number(f[k++]);
    c.bht_total_stderr = parse_number(f[k++]);
    c.map_verdict = f[k++];
    c.map_margin = parse_number(f[k++]);
    c.converse_verdict = f[k++];
    c.converse_margin = parse_number(f[k++]);
    c.bht_feasible = f[k++] == "true";
    c.bht_window_lower = parse_number(f[k++]);
    c.bht_window_upper = parse_number(f[k++]);
    c.bht_converse_bound = parse_number(f[k++]);
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace dbalign
