#pragma once

#include <filesystem>

#include <json.hpp>

#include "sdfit/fitter.hpp"
#include "sdfit/ingestion.hpp"

namespace sdfit {

struct FitSettings {
  int m_supply = 15;
  int m_demand = 5;
  SegmentationMethod method = SegmentationMethod::plateau;
  double price_cap = kDefaultPriceCap;
  FitOptions options;
};

/// The single configuration record shared by `batch`, `fit` and `synth`.
struct BatchConfig {
  FitSettings fit;
  GeneratorConfig generator;
  int workers = 1;
};

/// Throws Errc::invalid_argument on out-of-range values.
void validate(const FitSettings& settings);

nlohmann::ordered_json to_json(const FitSettings& settings);
nlohmann::ordered_json to_json(const GeneratorConfig& generator);
nlohmann::ordered_json to_json(const BatchConfig& config);

/// Missing keys keep their defaults; unknown keys are rejected.
BatchConfig config_from_json(const nlohmann::json& j);
BatchConfig load_config(const std::filesystem::path& path);

}  // namespace sdfit
