#include "bgeva/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "bgeva/archive.hpp"
#include "bgeva/data.hpp"
#include "bgeva/error.hpp"
#include "bgeva/fit.hpp"
#include "bgeva/inference.hpp"
#include "bgeva/report.hpp"
#include "bgeva/selection.hpp"
#include "bgeva/svg.hpp"

namespace bgeva {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& text, const std::string& what) {
  double v = 0;
  const auto s = trim(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("invalid number '" + text + "' for " + what);
  return v;
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_real(item, what));
  return out;
}

// "2006-2008", "2009" or "2006,2007"
std::set<int> parse_years(const std::string& text) {
  std::set<int> years;
  for (const auto& item : split_list(text)) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      years.insert(static_cast<int>(parse_real(item, "year")));
      continue;
    }
    const int a = static_cast<int>(parse_real(item.substr(0, dash), "year"));
    const int b = static_cast<int>(parse_real(item.substr(dash + 1), "year"));
    if (b < a) throw ConfigError("year range '" + item + "' is reversed");
    for (int y = a; y <= b; ++y) years.insert(y);
  }
  if (years.empty()) throw ConfigError("empty year list '" + text + "'");
  return years;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string report_prefix(const std::string& explicit_prefix, const std::string& out_path) {
  if (!explicit_prefix.empty()) return explicit_prefix;
  auto p = std::filesystem::path(out_path);
  if (p.extension() == ".json") p.replace_extension();
  return p.string();
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 1; i < args.size(); ++i) s += (i > 1 ? " " : "") + args[i];
  return s;
}

LinkKind resolve_link(const std::string& text, const std::optional<double>& tau) {
  LinkKind link = text == "gev" ? LinkKind::gev(tau.value_or(-0.25)) : LinkKind::parse(text);
  if (tau && text != "gev") {
    if (!link.is_gev()) throw ConfigError("--tau only applies to the gev link");
    link = LinkKind::gev(*tau);
  }
  return link;
}

// Every covariate as a default smooth when no formula is given.
DesignSpec default_spec(const Dataset& data, int k, BasisKind basis) {
  DesignSpec spec;
  for (const auto& name : data.names()) spec.terms.push_back(TermSpec::smooth_of(name, k, basis));
  return spec;
}

struct CommonFit {
  int max_outer = 50;
  double severity_ratio = 0.01;
  std::uint64_t seed = 1;
  std::string tau_metric = "h";
};

// --------------------------------------------------------------------------

struct FitArgs {
  std::string data, response = "y", year, formula, link = "gev:-0.25", out, report, plot_dir;
  std::optional<double> tau;
  bool backward = false;
  double alpha = 0.05;
  std::string tau_grid;
  double holdout = 0.1;
  int k = 20;
  std::string basis = "tp";
  double vif = 0.0;
  std::optional<double> subsample;
  CommonFit common;
};

int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  FitConfig cfg;
  cfg.max_outer = a.common.max_outer;
  cfg.severity_ratio = a.common.severity_ratio;
  cfg.seed = a.common.seed;
  cfg.tau_metric = parse_tau_metric(a.common.tau_metric);
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw ConfigError("--alpha must lie in (0,1)");
  if (!(a.holdout > 0.0 && a.holdout < 1.0)) throw ConfigError("--holdout must lie in (0,1)");
  const BasisKind basis = parse_basis_kind(a.basis);
  LinkKind link = resolve_link(a.link, a.tau);
  if (!a.tau_grid.empty()) cfg.tau_grid = parse_reals(a.tau_grid, "--tau-grid");
  cfg.validate();

  Dataset data = ingest_csv(a.data, a.response, a.year.empty() ? std::nullopt : std::optional(a.year));
  if (data.dropped_rows() > 0) err << "note: dropped " << data.dropped_rows() << " rows with missing values\n";
  if (a.subsample) data = stratified_subsample(data, *a.subsample, cfg.seed);

  std::vector<json> records;
  std::ostringstream text;
  if (a.vif > 0.0) {
    const auto screen = vif_screen(data, a.vif);
    for (const auto& w : screen.warnings) err << "warning: " << w << '\n';
    for (const auto& d : screen.dropped) {
      text << "VIF screen dropped " << d.name << " (VIF " << d.vif << ")\n";
      records.push_back({{"record", "vif_drop"}, {"term", d.name}, {"vif", std::isfinite(d.vif) ? json(d.vif) : json(nullptr)}});
    }
    data = data.select_columns(screen.kept);
  }

  DesignSpec spec = a.formula.empty() ? default_spec(data, a.k, basis) : DesignSpec::parse(a.formula);

  std::optional<TauGridResult> grid;
  if (!a.tau_grid.empty()) {
    grid = fit_tau_grid(spec, data, SplitPlan::holdout(a.holdout, cfg.seed), cfg);
    link = LinkKind::gev(grid->best_tau);
  }

  FittedModel model;
  std::optional<SelectionResult> selection;
  if (a.backward) {
    selection = backward_select(spec, data, link, cfg, a.alpha);
    model = selection->model;
    spec = selection->spec;
  } else {
    model = fit(spec, data, link, cfg);
  }

  const auto summary = summarize(model);
  text << "model: " << model_label(model.link) << "  " << spec.to_string() << '\n'
       << "n = " << model.n << ", loglik = " << model.loglik << ", edf = " << model.smoothing.edf_total
       << ", UBRE = " << model.smoothing.ubre << ", converged = " << (model.converged ? "yes" : "no") << '\n';
  for (const auto& note : model.diagnostics.notes) {
    text << "note: " << note << '\n';
    records.push_back({{"record", "note"}, {"note", note}});
  }
  text << '\n';
  text << format_summary(summary);
  for (auto& r : summary_records(summary)) records.push_back(std::move(r));
  if (grid) {
    text << '\n' << format_tau_grid(*grid);
    for (auto& r : tau_grid_records(*grid)) records.push_back(std::move(r));
  }
  if (selection) {
    text << '\n' << format_selection(selection->trace);
    for (auto& r : selection_records(selection->trace)) records.push_back(std::move(r));
  }

  ModelArchive archive;
  archive.model = model;
  archive.provenance.data_hash = dataset_hash(data);
  archive.provenance.seed = cfg.seed;
  archive.provenance.config = config_to_json(cfg);
  archive.provenance.config["link"] = model.link.to_string();
  archive.provenance.config["formula"] = spec.to_string();
  archive.provenance.command = join_args(argv);
  records.insert(records.begin(), json{{"record", "config"}, {"config", archive.provenance.config},
                                       {"data_hash", archive.provenance.data_hash}});
  save_archive(a.out, archive);

  const std::string prefix = report_prefix(a.report, a.out);
  write_text(prefix + ".summary.txt", text.str());
  write_text(prefix + ".summary.jsonl", json_lines(records));

  if (!a.plot_dir.empty()) {
    for (auto idx : model.smooth_terms()) {
      const auto& name = model.terms[idx].name;
      const auto band = smooth_ci(model, name);
      const auto sp = smooth_pvalue(model, name);
      write_text((std::filesystem::path(a.plot_dir) / (name + ".svg")).string(),
                 smooth_svg(band, model.training_x.at(name), sp.edf));
    }
  }

  out << text.str();
  if (!model.converged) {
    err << "error: fit did not converge; archive written with converged=false\n";
    return kExitConvergence;
  }
  return kExitOk;
}

// --------------------------------------------------------------------------

struct PredictArgs {
  std::string model, data, response, year, out;
  double severity_ratio = 0.01;
};

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const auto archive = load_archive(a.model);
  const auto data = ingest_csv(a.data, a.response, a.year.empty() ? std::nullopt : std::optional(a.year));
  const auto pred = predict(archive.model, data);
  std::ostringstream csv;
  csv << "eta,pd,extrapolated,clamped\n";
  std::size_t extrapolated = 0, clamped = 0;
  for (Eigen::Index i = 0; i < pred.pd.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    csv << shortest(pred.eta[i]) << ',' << shortest(pred.pd[i]) << ',' << int(pred.extrapolated[ui]) << ','
        << int(pred.clamped[ui]) << '\n';
    extrapolated += pred.extrapolated[ui];
    clamped += pred.clamped[ui];
  }
  write_text(a.out, csv.str());
  out << "wrote " << pred.pd.size() << " predictions to " << a.out << '\n';
  if (extrapolated) err << "warning: " << extrapolated << " rows outside the training range of a smooth\n";
  if (clamped) err << "warning: " << clamped << " rows pulled back inside the gev support\n";
  if (!a.response.empty()) {
    const auto m = evaluate_metrics(data.response(), pred.pd, a.severity_ratio, "scored");
    out << "MAE+ " << m.mae_plus << "  MSE+ " << m.mse_plus << "  H " << m.h_measure << "  AUC " << m.auc << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------------------

struct ValidateArgs {
  std::vector<std::string> models;
  std::string data, response = "y", year, report;
  std::optional<double> holdout;
  std::string train_years;
  std::vector<std::string> test_years;
  std::uint64_t seed = 1;
  double severity_ratio = 0.01;
  bool no_refit = false;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream&) {
  std::vector<SplitPlan> plans;
  if (a.holdout) {
    if (!(*a.holdout > 0.0 && *a.holdout < 1.0)) throw ConfigError("--holdout must lie in (0,1)");
    plans.push_back(SplitPlan::holdout(*a.holdout, a.seed));
  }
  if (!a.test_years.empty()) {
    if (a.train_years.empty()) throw ConfigError("--test-years needs --train-years");
    if (a.year.empty()) throw DataError("time-based splits need a year column (--year)");
    for (const auto& t : a.test_years) plans.push_back(SplitPlan::by_time(parse_years(a.train_years), parse_years(t)));
  }
  if (plans.empty()) throw ConfigError("give --holdout and/or --train-years with --test-years");

  std::vector<ModelArchive> archives;
  for (const auto& path : a.models) archives.push_back(load_archive(path));
  const auto data = ingest_csv(a.data, a.response, a.year.empty() ? std::nullopt : std::optional(a.year));

  ValidationReport report;
  report.config = {{"data", a.data},
                   {"data_hash", dataset_hash(data)},
                   {"seed", a.seed},
                   {"severity_ratio", a.severity_ratio},
                   {"refit", !a.no_refit},
                   {"models", a.models}};
  for (const auto& ar : archives) report.models.push_back(model_label(ar.model.link));
  for (std::size_t i = 0; i < report.models.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (report.models[i] == report.models[j]) report.models[i] += " #" + std::to_string(i + 1);

  for (const auto& plan : plans) {
    const auto label = split_label(plan);
    report.splits.push_back(label);
    const auto parts = split(data, plan);
    std::vector<MetricsReport> cells(archives.size());
    std::vector<std::string> failures(archives.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t m = 0; m < archives.size(); ++m) {
      try {
        const auto& ar = archives[m];
        FittedModel model;
        if (a.no_refit) {
          model = ar.model;
        } else {
          FitConfig cfg = config_from_json(ar.provenance.config);
          model = fit(ar.model.spec, parts.train, ar.model.link, cfg);
        }
        const auto pred = predict(model, parts.test);
        cells[m] = evaluate_metrics(parts.test.response(), pred.pd, a.severity_ratio, label);
      } catch (const std::exception& e) {
        failures[m] = e.what();
      }
    }
    for (std::size_t m = 0; m < archives.size(); ++m) {
      if (!failures[m].empty()) throw NumericalError(report.models[m] + " on " + label + ": " + failures[m]);
      report.cells.push_back({label, report.models[m], cells[m]});
    }
  }

  const auto table = format_validation(report);
  out << table;
  if (!a.report.empty()) {
    write_text(a.report + ".txt", table);
    write_text(a.report + ".jsonl", json_lines(validation_records(report)));
  }
  return kExitOk;
}

// --------------------------------------------------------------------------

struct SimulateArgs {
  std::size_t n = 1000;
  double rate = 0.05;
  std::string link = "logit", linear, smooth, years, out, truth;
  std::optional<double> intercept;
  std::size_t noise = 0;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  if (!(a.rate > 0.0 && a.rate < 1.0)) throw ConfigError("--rate must be a probability in (0,1)");
  if (a.n < 2) throw ConfigError("--n must be at least 2");
  SimulationConfig sc;
  sc.n = a.n;
  sc.link = LinkKind::parse(a.link);
  sc.intercept = a.intercept;
  sc.linear_effects = parse_reals(a.linear, "--linear");
  for (const auto& item : split_list(a.smooth)) {
    const auto colon = item.find(':');
    NonlinearEffect e;
    e.shape = parse_shape(trim(item.substr(0, colon)));
    if (colon != std::string::npos) e.amplitude = parse_real(item.substr(colon + 1), "--smooth amplitude");
    sc.nonlinear_effects.push_back(e);
  }
  sc.noise_covariates = a.noise;
  sc.target_positive_rate = a.rate;
  if (!a.years.empty()) {
    const auto ys = parse_years(a.years);
    sc.years = std::make_pair(*ys.begin(), *ys.rbegin());
  }
  sc.seed = a.seed;
  if (sc.linear_effects.empty() && sc.nonlinear_effects.empty() && sc.noise_covariates == 0)
    throw ConfigError("simulation needs at least one covariate");

  const auto sim = simulate(sc);
  write_csv(a.out, sim.data);
  std::ostringstream truth;
  truth << "eta,pd,intercept";
  for (const auto& name : sim.data.names()) truth << ",f_" << name;
  truth << '\n';
  for (Eigen::Index i = 0; i < sim.eta.size(); ++i) {
    truth << shortest(sim.eta[i]) << ',' << shortest(sim.pd[i]) << ',' << shortest(sim.intercept);
    for (Eigen::Index j = 0; j < sim.components.cols(); ++j) truth << ',' << shortest(sim.components(i, j));
    truth << '\n';
  }
  const std::string truth_path = a.truth.empty() ? a.out + ".truth.csv" : a.truth;
  write_text(truth_path, truth.str());
  out << "wrote " << sim.data.n() << " rows (" << sim.data.positives() << " positives, rate "
      << sim.data.positive_rate() << ") to " << a.out << "; truth in " << truth_path << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------------

struct PlotArgs {
  std::string model, term, out;
  double level = 0.95;
  int grid = 200;
};

int cmd_plot(const PlotArgs& a, std::ostream& out, std::ostream&) {
  if (!(a.level > 0.0 && a.level < 1.0)) throw ConfigError("--level must lie in (0,1)");
  if (a.grid < 2) throw ConfigError("--grid must be at least 2");
  const auto archive = load_archive(a.model);
  const auto& model = archive.model;
  const auto& term = model.terms[model.term_index(a.term)];
  if (term.kind != TermKind::smooth) throw ConfigError("term '" + a.term + "' is not a smooth");
  const auto band = smooth_ci(model, a.term, a.grid, a.level);
  const auto sp = smooth_pvalue(model, a.term);
  const auto rug = model.training_x.count(a.term) ? model.training_x.at(a.term) : Eigen::VectorXd();
  write_text(a.out, smooth_svg(band, rug, sp.edf));
  out << "wrote " << a.out << " (" << edf_caption(a.term, sp.edf) << ")\n";
  return kExitOk;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has an empty key");
    kv[key] = value;
  }
  return kv;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!path) return kept;
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : kept)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& [key, value] : read_config_file(*path)) {
    if (given(key)) continue;
    if (value == "true") {
      kept.push_back("--" + key);
    } else if (value != "false") {
      kept.push_back("--" + key + "=" + value);
    }
  }
  return kept;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary regression with a GEV link and penalized spline effects", "bgeva"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model and write an archive plus summary report");
  fit_cmd->add_option("--data", fa.data, "training CSV")->required();
  fit_cmd->add_option("--response", fa.response, "0/1 response column");
  fit_cmd->add_option("--year", fa.year, "calendar year column");
  fit_cmd->add_option("--formula", fa.formula, "e.g. \"s(x1) + x2 + s(x3,k=10,bs=cr)\"; default: every covariate smooth");
  fit_cmd->add_option("--link", fa.link, "gev:<tau>, gev, loglog or logit");
  fit_cmd->add_option("--tau", fa.tau, "gev tail parameter");
  fit_cmd->add_option("--out", fa.out, "archive path")->required();
  fit_cmd->add_option("--report", fa.report, "report prefix (default: archive path without .json)");
  fit_cmd->add_option("--plot-dir", fa.plot_dir, "write one SVG per smooth here");
  fit_cmd->add_flag("--backward-select", fa.backward, "backward elimination of terms");
  fit_cmd->add_option("--alpha", fa.alpha, "selection significance level");
  fit_cmd->add_option("--tau-grid", fa.tau_grid, "comma-separated gev tau values chosen on a holdout split");
  fit_cmd->add_option("--holdout", fa.holdout, "validation fraction for --tau-grid");
  fit_cmd->add_option("--tau-metric", fa.common.tau_metric, "h or mae");
  fit_cmd->add_option("--k", fa.k, "basis dimension of default smooths");
  fit_cmd->add_option("--basis", fa.basis, "tp or cr for default smooths");
  fit_cmd->add_option("--vif", fa.vif, "drop covariates with VIF above this (0 = off)");
  fit_cmd->add_option("--subsample", fa.subsample, "thin negatives to this positive rate");
  fit_cmd->add_option("--max-outer", fa.common.max_outer, "outer iteration limit");
  fit_cmd->add_option("--severity-ratio", fa.common.severity_ratio, "H-measure severity ratio");
  fit_cmd->add_option("--seed", fa.common.seed, "random seed");

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "score a dataset with an archived model");
  predict_cmd->add_option("--model", pa.model, "archive")->required();
  predict_cmd->add_option("--data", pa.data, "CSV to score")->required();
  predict_cmd->add_option("--response", pa.response, "optional response column; metrics are printed when given");
  predict_cmd->add_option("--year", pa.year, "year column to ignore");
  predict_cmd->add_option("--out", pa.out, "prediction CSV")->required();
  predict_cmd->add_option("--severity-ratio", pa.severity_ratio, "H-measure severity ratio");

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "out-of-sample and out-of-time comparison of archived models");
  validate_cmd->add_option("--model", va.models, "archive (repeatable)")->required();
  validate_cmd->add_option("--data", va.data, "labeled CSV")->required();
  validate_cmd->add_option("--response", va.response, "0/1 response column");
  validate_cmd->add_option("--year", va.year, "calendar year column");
  validate_cmd->add_option("--holdout", va.holdout, "random test fraction");
  validate_cmd->add_option("--train-years", va.train_years, "e.g. 2006-2008");
  validate_cmd->add_option("--test-years", va.test_years, "e.g. 2009 or 2009-2010 (repeatable)");
  validate_cmd->add_option("--seed", va.seed, "holdout seed");
  validate_cmd->add_option("--severity-ratio", va.severity_ratio, "H-measure severity ratio");
  validate_cmd->add_flag("--no-refit", va.no_refit, "score archives as they are instead of refitting on the train split");
  validate_cmd->add_option("--report", va.report, "write <prefix>.txt and <prefix>.jsonl");

  SimulateArgs sa;
  auto* simulate_cmd = app.add_subcommand("simulate", "write a synthetic dataset and its truth sidecar");
  simulate_cmd->add_option("--n", sa.n, "rows");
  simulate_cmd->add_option("--rate", sa.rate, "target positive rate");
  simulate_cmd->add_option("--link", sa.link, "generating link");
  simulate_cmd->add_option("--intercept", sa.intercept, "fixed intercept instead of calibrating to --rate");
  simulate_cmd->add_option("--linear", sa.linear, "comma-separated linear coefficients");
  simulate_cmd->add_option("--smooth", sa.smooth, "comma-separated shape:amplitude (sine, bump, piecewise)");
  simulate_cmd->add_option("--noise", sa.noise, "number of pure-noise covariates");
  simulate_cmd->add_option("--years", sa.years, "assign years uniformly, e.g. 2006-2010");
  simulate_cmd->add_option("--seed", sa.seed, "random seed");
  simulate_cmd->add_option("--out", sa.out, "CSV path")->required();
  simulate_cmd->add_option("--truth", sa.truth, "truth sidecar (default <out>.truth.csv)");

  PlotArgs la;
  auto* plot_cmd = app.add_subcommand("plot", "SVG of one smooth with its confidence band");
  plot_cmd->add_option("--model", la.model, "archive")->required();
  plot_cmd->add_option("--term", la.term, "smooth covariate")->required();
  plot_cmd->add_option("--out", la.out, "SVG path")->required();
  plot_cmd->add_option("--level", la.level, "confidence level");
  plot_cmd->add_option("--grid", la.grid, "evaluation points");

  try {
    const auto args = merge_config(raw_args);
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitConfig;
    }

    if (fit_cmd->parsed()) return cmd_fit(fa, raw_args, out, err);
    if (predict_cmd->parsed()) return cmd_predict(pa, out, err);
    if (validate_cmd->parsed()) return cmd_validate(va, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(sa, out, err);
    if (plot_cmd->parsed()) return cmd_plot(la, out, err);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const FormatError& e) {
    err << "archive error: " << e.what() << '\n';
    return kExitData;
  } catch (const DomainError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace bgeva
