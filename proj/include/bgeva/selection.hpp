#pragma once

#include <string>
#include <vector>

#include "bgeva/fit.hpp"

namespace bgeva {

struct SelectionStep {
  std::string dropped;
  double p_value = 0.0;
  bool reinstated = false;  // refit failed; term put back and marked kept-degenerate
  std::string note;
  // refit after the drop
  double loglik = 0.0;
  double edf_total = 0.0;
  double ubre = 0.0;
};

struct SelectionTrace {
  std::vector<SelectionStep> steps;
  std::vector<std::string> final_terms;
  std::vector<std::string> kept_degenerate;
  std::vector<std::string> demoted;  // smooths turned into linear terms along the way
};

struct SelectionResult {
  FittedModel model;
  DesignSpec spec;
  SelectionTrace trace;
};

// p-value of every non-intercept term of a fitted model in declaration order
// (Wald for parametric terms, chi-square for smooths).
std::vector<std::pair<std::string, double>> term_pvalues(const FittedModel& model);

// Backward elimination: refit, demote edf ~ 1 smooths, drop the single term
// with the largest p-value above alpha, repeat.
SelectionResult backward_select(const DesignSpec& spec, const Dataset& data, const LinkKind& link,
                                const FitConfig& cfg, double alpha = 0.05);

}  // namespace bgeva
