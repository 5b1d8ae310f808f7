#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "bgeva/data.hpp"
#include "bgeva/fit.hpp"

namespace bgeva {

inline constexpr int kArchiveFormatVersion = 1;

struct Provenance {
  std::string data_hash;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::string command;
};

struct ModelArchive {
  FittedModel model;
  Provenance provenance;
};

// 64-bit FNV-1a over the response, covariate values, names and years.
std::string dataset_hash(const Dataset& data);

nlohmann::json config_to_json(const FitConfig& cfg);
FitConfig config_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

nlohmann::json archive_to_json(const ModelArchive& archive);
ModelArchive archive_from_json(const nlohmann::json& j);

// Versioned JSON text; doubles are written in shortest round-trip form so a
// reloaded model predicts bit-identically.
void save_archive(const std::string& path, const ModelArchive& archive);
ModelArchive load_archive(const std::string& path);

}  // namespace bgeva
