#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bgeva/data.hpp"
#include "bgeva/fit.hpp"
#include "bgeva/inference.hpp"
#include "bgeva/metrics.hpp"
#include "bgeva/selection.hpp"

namespace bgeva {

// Aligned text in two blocks: parametric (Estimate, Std. Error, z value,
// p-value) and smooth (Edf, Est.rank, Chi.sq, p-value).
std::string format_summary(const SummaryTable& table);
std::vector<nlohmann::json> summary_records(const SummaryTable& table);

std::string format_selection(const SelectionTrace& trace);
std::vector<nlohmann::json> selection_records(const SelectionTrace& trace);

std::string format_tau_grid(const TauGridResult& grid);
std::vector<nlohmann::json> tau_grid_records(const TauGridResult& grid);

// Column label of a model in comparison tables: "BGEVA(-0.25)", "Loglog", "Logit".
std::string model_label(const LinkKind& link);

// "Out-of-sample", "Out-of-time 2009", "Two years: 2009-2010", ...
std::string split_label(const SplitPlan& plan);

struct ValidationCell {
  std::string split;
  std::string model;
  MetricsReport metrics;
};

struct ValidationReport {
  std::vector<std::string> splits;  // row blocks in order
  std::vector<std::string> models;  // columns in order
  std::vector<ValidationCell> cells;
  nlohmann::json config = nlohmann::json::object();

  const ValidationCell* find(const std::string& split, const std::string& model) const;
};

// One block per split: rows MAE+, MSE+, H, AUC; one column per model.
std::string format_validation(const ValidationReport& report);
std::vector<nlohmann::json> validation_records(const ValidationReport& report);

std::string json_lines(const std::vector<nlohmann::json>& records);

}  // namespace bgeva
