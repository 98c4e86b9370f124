#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sdfit/config.hpp"
#include "sdfit/erf_model.hpp"
#include "sdfit/fitter.hpp"
#include "sdfit/ingestion.hpp"

namespace sdfit {

struct HourRecord {
  Date date;
  int hour = 1;
  bool processed = false;
  std::string skip_reason;
  double price = 0.0;        // P, exact clearing on untruncated step curves
  double quantity = 0.0;
  double price_appr = 0.0;   // P_appr, intersection of the fitted models
  double quantity_appr = 0.0;
  double abs_error = 0.0;
  bool above_cap = false;    // P exceeds the fitting price cap
  double build_seconds = 0.0;
  double fit_seconds = 0.0;
  double intersect_seconds = 0.0;
  std::optional<ErfSumModel> supply_model;
  std::optional<ErfSumModel> demand_model;
};

struct FitReport {
  std::vector<HourRecord> records;  // one per corpus hour, corpus order
  std::size_t processed = 0;
  std::size_t skipped = 0;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  double total_seconds = 0.0;
  FitSettings config;
};

struct BatchOptions {
  int workers = 1;
  bool keep_models = false;
};

/// Per hour: exact equilibrium on the raw curves, fits of the truncated
/// curves, and the fitted intersection. Degenerate hours are skipped with a
/// reason; throws Errc::empty_report when nothing could be processed.
FitReport run_batch(const Corpus& corpus, const FitSettings& settings, const BatchOptions& options = {});

struct LayerMeans {
  double offers = 0.0;
  double bids = 0.0;
  std::size_t hours = 0;
};

/// Mean layer counts keyed by hour of day (1..24), ISO weekday (1 = Monday)
/// and month (1..12). Only keys present in the corpus appear.
struct LayerCountStats {
  std::map<int, LayerMeans> by_hour;
  std::map<int, LayerMeans> by_weekday;
  std::map<int, LayerMeans> by_month;
};

LayerCountStats layer_stats(const Corpus& corpus);

struct MinMeanMax {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct TermStats {
  MinMeanMax amplitude;
  MinMeanMax center;
  MinMeanMax shape;
};

struct CoefficientStats {
  Side side = Side::supply;
  std::size_t models = 0;
  std::vector<TermStats> terms;  // index i -> statistics of term i
};

/// All models must share side and term count.
CoefficientStats coefficient_stats(std::span<const ErfSumModel> models);
CoefficientStats coefficient_stats(std::span<const FittedCurve> fitted);

/// Step staircase plus the model sampled at `samples` points, axes in MW and
/// EUR.
void render_curve_svg(const StepCurve& step, const ErfSumModel& model, const std::filesystem::path& path,
                      int samples = 600);

enum class ReportFormat { csv, json };

ReportFormat format_from_string(std::string_view text);

struct EmitOptions {
  /// Wall-clock columns make reports differ between runs; off by default.
  bool include_timing = false;
};

using AnyReport = std::variant<FitReport, CoefficientStats, LayerCountStats>;

std::string render_report(const FitReport& report, ReportFormat format, const EmitOptions& options = {});
std::string render_report(const CoefficientStats& stats, ReportFormat format, const EmitOptions& options = {});
std::string render_report(const LayerCountStats& stats, ReportFormat format, const EmitOptions& options = {});

void emit_report(const AnyReport& report, ReportFormat format, const std::filesystem::path& path,
                 const EmitOptions& options = {});

}  // namespace sdfit
