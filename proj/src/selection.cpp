#include "bgeva/selection.hpp"

#include <algorithm>

#include "bgeva/error.hpp"
#include "bgeva/inference.hpp"

namespace bgeva {

std::vector<std::pair<std::string, double>> term_pvalues(const FittedModel& model) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& t : model.spec.terms) {
    const auto& dt = model.terms[model.term_index(t.covariate)];
    const double p = dt.kind == TermKind::parametric ? wald_test(model, dt.name).p_value
                                                     : smooth_pvalue(model, dt.name).p_value;
    out.emplace_back(dt.name, p);
  }
  return out;
}

namespace {

struct Fitted {
  FittedModel model;
  DesignSpec spec;
};

Fitted fit_and_demote(const DesignSpec& spec, const Dataset& data, const LinkKind& link, const FitConfig& cfg,
                      SelectionTrace& trace) {
  auto model = fit(spec, data, link, cfg);
  auto dem = demote_linear_smooths(model, data, cfg);
  for (auto& name : dem.demoted) trace.demoted.push_back(name);
  return {std::move(dem.model), std::move(dem.spec)};
}

}  // namespace

SelectionResult backward_select(const DesignSpec& spec, const Dataset& data, const LinkKind& link,
                                const FitConfig& cfg, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("significance level must lie in (0,1]");
  SelectionResult result;
  auto current = fit_and_demote(spec, data, link, cfg, result.trace);

  while (current.spec.terms.size() > 1) {
    auto pvalues = term_pvalues(current.model);
    // candidates above alpha, worst first; equal p-values keep declaration order
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
      const auto& name = pvalues[i].first;
      const bool degenerate = std::find(result.trace.kept_degenerate.begin(), result.trace.kept_degenerate.end(),
                                        name) != result.trace.kept_degenerate.end();
      if (pvalues[i].second > alpha && !degenerate) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a].second > pvalues[b].second; });
    if (order.empty()) break;

    bool dropped = false;
    for (auto i : order) {
      const auto& [name, p] = pvalues[i];
      SelectionStep step;
      step.dropped = name;
      step.p_value = p;
      try {
        auto next = fit_and_demote(current.spec.without(name), data, link, cfg, result.trace);
        step.loglik = next.model.loglik;
        step.edf_total = next.model.smoothing.edf_total;
        step.ubre = next.model.smoothing.ubre;
        result.trace.steps.push_back(step);
        current = std::move(next);
        dropped = true;
        break;
      } catch (const Error& e) {
        step.reinstated = true;
        step.note = e.what();
        result.trace.steps.push_back(step);
        result.trace.kept_degenerate.push_back(name);
      }
    }
    if (!dropped) break;
  }
  for (const auto& t : current.spec.terms) result.trace.final_terms.push_back(t.covariate);
  result.model = std::move(current.model);
  result.spec = std::move(current.spec);
  return result;
}

}  // namespace bgeva
