#include "bgeva/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bgeva {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return std::isnan(v) ? "NA" : (v > 0 ? "Inf" : "-Inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pvalue_text(double p) {
  if (!std::isfinite(p)) return "NA";
  if (p < 2e-16) return "<2e-16";
  char buf[64];
  if (p < 1e-3) std::snprintf(buf, sizeof buf, "%.2e", p);
  else std::snprintf(buf, sizeof buf, "%.4f", p);
  return buf;
}

// Left-aligned first column, right-aligned rest.
std::string render(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return {};
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      const std::string pad(width[j] - r[j].size(), ' ');
      if (j == 0) out << r[j] << pad;
      else out << "  " << pad << r[j];
    }
    out << '\n';
  }
  return out.str();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* count_word(std::size_t n) {
  static const char* words[] = {"Zero", "One", "Two", "Three", "Four", "Five", "Six", "Seven", "Eight", "Nine", "Ten"};
  return n <= 10 ? words[n] : nullptr;
}

}  // namespace

std::string format_summary(const SummaryTable& table) {
  std::ostringstream out;
  out << "Parametric coefficients:\n";
  std::vector<std::vector<std::string>> rows{{"", "Estimate", "Std. Error", "z value", "p-value"}};
  for (const auto& w : table.parametric)
    rows.push_back({w.term, fixed(w.estimate, 4), fixed(w.se, 4), fixed(w.z, 3), pvalue_text(w.p_value)});
  out << render(rows);
  if (!table.smooth.empty()) {
    out << "\nSmooth terms:\n";
    rows = {{"", "Edf", "Est.rank", "Chi.sq", "p-value"}};
    for (const auto& s : table.smooth) {
      std::string rank = std::to_string(s.rank);
      if (s.degenerate) rank += " (degenerate)";
      else if (s.rank_reduced) rank += " (reduced)";
      rows.push_back({"s(" + s.term + ")", fixed(s.edf, 2), rank, fixed(s.chi_sq, 3), pvalue_text(s.p_value)});
    }
    out << render(rows);
  }
  return out.str();
}

std::vector<json> summary_records(const SummaryTable& table) {
  std::vector<json> out;
  for (const auto& w : table.parametric)
    out.push_back({{"record", "parametric"},
                   {"term", w.term},
                   {"estimate", w.estimate},
                   {"std_error", finite_or_null(w.se)},
                   {"z", finite_or_null(w.z)},
                   {"p_value", finite_or_null(w.p_value)},
                   {"degenerate", w.degenerate}});
  for (const auto& s : table.smooth)
    out.push_back({{"record", "smooth"},
                   {"term", s.term},
                   {"edf", s.edf},
                   {"est_rank", s.rank},
                   {"chi_sq", finite_or_null(s.chi_sq)},
                   {"p_value", finite_or_null(s.p_value)},
                   {"rank_reduced", s.rank_reduced},
                   {"degenerate", s.degenerate}});
  return out;
}

std::string format_selection(const SelectionTrace& trace) {
  std::ostringstream out;
  out << "Backward selection:\n";
  std::vector<std::vector<std::string>> rows{{"step", "dropped", "p-value", "loglik", "edf", "UBRE", "note"}};
  int k = 0;
  for (const auto& s : trace.steps) {
    ++k;
    rows.push_back({std::to_string(k), s.dropped + (s.reinstated ? " (reinstated)" : ""), pvalue_text(s.p_value),
                    fixed(s.loglik, 3), fixed(s.edf_total, 2), fixed(s.ubre, 5), s.note});
  }
  out << render(rows);
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& t : v) s += (s.empty() ? "" : ", ") + t;
    return s.empty() ? std::string("none") : s;
  };
  out << "final terms: " << list(trace.final_terms) << '\n';
  out << "demoted to linear: " << list(trace.demoted) << '\n';
  out << "kept (degenerate refit): " << list(trace.kept_degenerate) << '\n';
  return out.str();
}

std::vector<json> selection_records(const SelectionTrace& trace) {
  std::vector<json> out;
  int k = 0;
  for (const auto& s : trace.steps)
    out.push_back({{"record", "selection_step"},
                   {"step", ++k},
                   {"dropped", s.dropped},
                   {"p_value", finite_or_null(s.p_value)},
                   {"reinstated", s.reinstated},
                   {"loglik", finite_or_null(s.loglik)},
                   {"edf_total", finite_or_null(s.edf_total)},
                   {"ubre", finite_or_null(s.ubre)},
                   {"note", s.note}});
  out.push_back({{"record", "selection_result"},
                 {"final_terms", trace.final_terms},
                 {"demoted", trace.demoted},
                 {"kept_degenerate", trace.kept_degenerate}});
  return out;
}

std::string format_tau_grid(const TauGridResult& grid) {
  std::ostringstream out;
  out << "tau grid (validation split):\n";
  std::vector<std::vector<std::string>> rows{{"tau", "MAE+", "MSE+", "H", "AUC", "converged", "note"}};
  for (const auto& r : grid.table) {
    if (r.ok)
      rows.push_back({fixed(r.tau, 2), fixed(r.metrics.mae_plus, 4), fixed(r.metrics.mse_plus, 4),
                      fixed(r.metrics.h_measure, 4), fixed(r.metrics.auc, 4), r.converged ? "yes" : "no", r.note});
    else
      rows.push_back({fixed(r.tau, 2), "-", "-", "-", "-", "-", r.note});
  }
  out << render(rows);
  out << "selected tau: " << fixed(grid.best_tau, 2) << '\n';
  return out.str();
}

std::vector<json> tau_grid_records(const TauGridResult& grid) {
  std::vector<json> out;
  for (const auto& r : grid.table) {
    json j = {{"record", "tau_grid"}, {"tau", r.tau}, {"ok", r.ok}, {"converged", r.converged}, {"note", r.note}};
    if (r.ok) {
      j["mae_plus"] = r.metrics.mae_plus;
      j["mse_plus"] = r.metrics.mse_plus;
      j["h_measure"] = r.metrics.h_measure;
      j["auc"] = r.metrics.auc;
    }
    out.push_back(std::move(j));
  }
  out.push_back({{"record", "tau_selected"}, {"tau", grid.best_tau}});
  return out;
}

std::string model_label(const LinkKind& link) {
  switch (link.family) {
    case LinkFamily::gev: {
      std::ostringstream s;
      s << "BGEVA(" << link.tau << ")";
      return s.str();
    }
    case LinkFamily::loglog:
      return "Loglog";
    case LinkFamily::logit:
      break;
  }
  return "Logit";
}

std::string split_label(const SplitPlan& plan) {
  if (plan.kind == SplitPlan::Kind::holdout) return "Out-of-sample";
  const auto& years = plan.test_years;
  if (years.empty()) return "Out-of-time";
  if (years.size() == 1) return "Out-of-time " + std::to_string(*years.begin());
  const int first = *years.begin();
  const int last = *years.rbegin();
  std::ostringstream s;
  if (const char* w = count_word(years.size())) s << w << " years: ";
  else s << years.size() << " years: ";
  s << first << "-" << last;
  return s.str();
}

const ValidationCell* ValidationReport::find(const std::string& split, const std::string& model) const {
  for (const auto& c : cells)
    if (c.split == split && c.model == model) return &c;
  return nullptr;
}

std::string format_validation(const ValidationReport& report) {
  std::ostringstream out;
  bool first = true;
  for (const auto& split : report.splits) {
    if (!first) out << '\n';
    first = false;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> head{split};
    for (const auto& m : report.models) head.push_back(m);
    rows.push_back(head);
    const char* names[] = {"MAE+", "MSE+", "H", "AUC"};
    for (int k = 0; k < 4; ++k) {
      std::vector<std::string> row{names[k]};
      for (const auto& m : report.models) {
        const auto* c = report.find(split, m);
        if (!c) {
          row.push_back("-");
          continue;
        }
        const auto& r = c->metrics;
        const double v = k == 0 ? r.mae_plus : k == 1 ? r.mse_plus : k == 2 ? r.h_measure : r.auc;
        row.push_back(fixed(v, 4));
      }
      rows.push_back(std::move(row));
    }
    out << render(rows);
  }
  return out.str();
}

std::vector<json> validation_records(const ValidationReport& report) {
  std::vector<json> out;
  out.push_back({{"record", "config"}, {"config", report.config}});
  for (const auto& c : report.cells)
    out.push_back({{"record", "metrics"},
                   {"split", c.split},
                   {"model", c.model},
                   {"mae_plus", c.metrics.mae_plus},
                   {"mse_plus", c.metrics.mse_plus},
                   {"h_measure", c.metrics.h_measure},
                   {"auc", c.metrics.auc},
                   {"n_pos", c.metrics.n_pos},
                   {"n_neg", c.metrics.n_neg},
                   {"severity_ratio", c.metrics.severity_ratio}});
  return out;
}

std::string json_lines(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + '\n';
  return out;
}

}  // namespace bgeva
