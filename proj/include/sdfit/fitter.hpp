#pragma once

#include <string_view>
#include <vector>

#include "sdfit/erf_model.hpp"
#include "sdfit/lm_solver.hpp"
#include "sdfit/market_curves.hpp"

namespace sdfit {

inline constexpr double kDefaultPriceCap = 400.0;
inline constexpr double kMinShape = 1e-8;

enum class SegmentationMethod { uniform, plateau };

std::string_view to_string(SegmentationMethod method) noexcept;
SegmentationMethod method_from_string(std::string_view text);

/// Price levels p_0 < p_1 < ... < p_M splitting the price axis into bands.
/// A curve with a single price yields one level and no bands.
struct Segmentation {
  SegmentationMethod method = SegmentationMethod::uniform;
  std::vector<double> levels;

  std::size_t segment_count() const { return levels.size() < 2 ? 0 : levels.size() - 1; }
};

/// Method 1: M equal price intervals between the curve's min and max price.
Segmentation segment_uniform(const StepCurve& curve, int segments);

/// Method 2: interior levels are plateau prices. The M-1 widest plateaus
/// strictly between min and max price are used (ties go to the lower
/// price); with fewer candidates all of them are used.
Segmentation segment_plateau(const StepCurve& curve, int segments);

Segmentation segment_curve(const StepCurve& curve, int segments, SegmentationMethod method);

struct FitOptions {
  SolverOptions solver;
  bool single_jump_shortcut = true;
  /// The shortcut's transition width never exceeds this fraction of the
  /// curve's quantity extent.
  double shortcut_resolution = 1e-3;
};

/// One band of one curve, fitted by a single erf term.
struct SegmentFit {
  ErfTerm term;
  double level_lo = 0.0;
  double level_hi = 0.0;
  double residual_norm = 0.0;  // over the band's data points
  int jumps = 0;
  bool shortcut = false;
  int solver_iterations = 0;
};

/// Fits one term to the curve clipped to [level_lo, level_hi]. Data points
/// are the corners of every step between the last step at or below
/// level_lo and the first step at or above level_hi.
SegmentFit fit_segment_detailed(const StepCurve& curve, double level_lo, double level_hi,
                                const FitOptions& options = {});

ErfTerm fit_segment(const StepCurve& curve, double level_lo, double level_hi,
                    const FitOptions& options = {});

struct FittedCurve {
  ErfSumModel model;
  Segmentation segmentation;
  std::vector<SegmentFit> segments;
  double fit_seconds = 0.0;
};

/// Segments the (already truncated) curve, fits each band independently and
/// sums the terms on top of the curve's minimum price.
FittedCurve fit_curve(const StepCurve& curve, int segments, SegmentationMethod method,
                      const FitOptions& options = {});

/// Bisection on demand(q) - supply(q) over [0, q_max].
Equilibrium intersect_fitted(const ErfSumModel& supply, const ErfSumModel& demand, double q_max);

/// RMS of model minus step price, sampled at the midpoint of every step.
double residual_rms(const StepCurve& curve, const ErfSumModel& model);

/// Fit record without wall-clock data; identical inputs give identical JSON.
nlohmann::ordered_json to_json(const FittedCurve& fitted);

}  // namespace sdfit
