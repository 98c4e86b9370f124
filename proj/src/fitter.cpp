#include "sdfit/fitter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "sdfit/error.hpp"

namespace sdfit {

std::string_view to_string(SegmentationMethod method) noexcept {
  return method == SegmentationMethod::uniform ? "uniform" : "plateau";
}

SegmentationMethod method_from_string(std::string_view text) {
  if (text == "uniform") return SegmentationMethod::uniform;
  if (text == "plateau") return SegmentationMethod::plateau;
  throw Error(Errc::invalid_argument, "unknown segmentation method '" + std::string(text) + "'");
}

namespace {

void require_segments(int segments) {
  if (segments < 1) throw Error(Errc::invalid_argument, "segment count must be >= 1");
}

}  // namespace

Segmentation segment_uniform(const StepCurve& curve, int segments) {
  require_segments(segments);
  const double lo = curve.min_price();
  const double hi = curve.max_price();
  Segmentation seg{SegmentationMethod::uniform, {lo}};
  if (hi == lo) return seg;
  const double width = (hi - lo) / segments;
  for (int i = 1; i < segments; ++i) seg.levels.push_back(lo + i * width);
  seg.levels.push_back(hi);
  return seg;
}

Segmentation segment_plateau(const StepCurve& curve, int segments) {
  require_segments(segments);
  const double lo = curve.min_price();
  const double hi = curve.max_price();
  Segmentation seg{SegmentationMethod::plateau, {lo}};
  if (hi == lo) return seg;

  struct Plateau {
    double extent;
    double price;
  };
  std::vector<Plateau> candidates;
  double prev_q = 0.0;
  for (const auto& pt : curve.points) {
    if (pt.price > lo && pt.price < hi) candidates.push_back({pt.quantity - prev_q, pt.price});
    prev_q = pt.quantity;
  }
  std::sort(candidates.begin(), candidates.end(), [](const Plateau& a, const Plateau& b) {
    return a.extent != b.extent ? a.extent > b.extent : a.price < b.price;
  });
  const auto keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(segments - 1));
  std::vector<double> interior;
  for (std::size_t i = 0; i < keep; ++i) interior.push_back(candidates[i].price);
  std::sort(interior.begin(), interior.end());
  seg.levels.insert(seg.levels.end(), interior.begin(), interior.end());
  seg.levels.push_back(hi);
  return seg;
}

Segmentation segment_curve(const StepCurve& curve, int segments, SegmentationMethod method) {
  return method == SegmentationMethod::uniform ? segment_uniform(curve, segments)
                                               : segment_plateau(curve, segments);
}

namespace {

// A step of the curve seen in increasing orientation: x grows left to right
// and prices are nondecreasing. Demand curves are mirrored (x = -quantity).
struct OrientedStep {
  double left;
  double right;
  double price;
};

std::vector<OrientedStep> oriented_steps(const StepCurve& curve) {
  std::vector<OrientedStep> steps;
  steps.reserve(curve.points.size());
  double prev_q = 0.0;
  for (const auto& pt : curve.points) {
    steps.push_back({prev_q, pt.quantity, pt.price});
    prev_q = pt.quantity;
  }
  if (curve.side == Side::demand) {
    std::reverse(steps.begin(), steps.end());
    for (auto& s : steps) s = {-s.right, -s.left, s.price};
  }
  return steps;
}

struct BandData {
  std::vector<double> x;
  std::vector<double> y;  // clipped price minus level_lo
  double rise = 0.0;      // y at the right anchor minus y at the left anchor
  double transition_left = 0.0;
  double transition_right = 0.0;
  int jumps = 0;
  // Single-jump geometry.
  double jump_at = 0.0;
  double jump_gap = 0.0;
};

BandData band_data(const std::vector<OrientedStep>& steps, double lo, double hi) {
  std::size_t first = 0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].price <= lo) first = k;
  }
  std::size_t last = steps.size() - 1;
  for (std::size_t k = steps.size(); k-- > 0;) {
    if (steps[k].price >= hi) last = k;
  }
  BandData band;
  double prev_y = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    const double y = std::clamp(steps[k].price, lo, hi) - lo;
    band.x.push_back(steps[k].left);
    band.y.push_back(y);
    band.x.push_back(steps[k].right);
    band.y.push_back(y);
    if (k > first && y != prev_y) {
      ++band.jumps;
      band.jump_at = steps[k].left;
      band.jump_gap = std::min(steps[k - 1].right - steps[k - 1].left, steps[k].right - steps[k].left);
    }
    prev_y = y;
  }
  band.rise = band.y.back() - band.y.front();
  band.transition_left = steps[first].right;
  band.transition_right = steps[last].left;
  if (band.transition_right < band.transition_left) std::swap(band.transition_left, band.transition_right);
  return band;
}

double term_residual_norm(const ErfTerm& term, const BandData& band) {
  double sum = 0.0;
  for (std::size_t i = 0; i < band.x.size(); ++i) {
    const double r = term_value(term, 1.0, band.x[i]) - band.y[i];
    sum += r * r;
  }
  return std::sqrt(sum);
}

}  // namespace

SegmentFit fit_segment_detailed(const StepCurve& curve, double level_lo, double level_hi,
                                const FitOptions& options) {
  if (!(level_lo < level_hi)) throw Error(Errc::invalid_argument, "band needs level_lo < level_hi");
  if (curve.points.empty()) throw Error(Errc::empty_segment, "curve is empty");
  if (curve.max_price() < level_lo || curve.min_price() > level_hi) {
    throw Error(Errc::empty_segment, "curve never attains prices in [" + std::to_string(level_lo) + ", " +
                                         std::to_string(level_hi) + "]");
  }
  const auto steps = oriented_steps(curve);
  const BandData band = band_data(steps, level_lo, level_hi);

  SegmentFit fit;
  fit.level_lo = level_lo;
  fit.level_hi = level_hi;
  fit.jumps = band.jumps;

  const double extent = band.transition_right - band.transition_left;
  const double midpoint = 0.5 * (band.transition_left + band.transition_right);
  const double resolution = options.shortcut_resolution * curve.total_quantity();

  ErfTerm term;
  if (band.jumps == 0) {
    term = {0.0, midpoint, extent > 0.0 ? 4.0 / extent : 4.0 / resolution};
  } else if (band.jumps == 1 && options.single_jump_shortcut) {
    const double width = std::min(band.jump_gap, resolution);
    term = {0.5 * band.rise, band.jump_at, 4.0 / width};
    fit.shortcut = true;
  } else {
    const std::size_t n = band.x.size();
    // The extra residual pins the term's asymptotic rise to the band's rise;
    // without it a wide term can fit a ramp-like band and keep rising
    // outside it.
    const double anchor_weight = 10.0 * std::sqrt(static_cast<double>(n));
    LeastSquaresProblem problem;
    problem.residual = [&band, n, anchor_weight](const Vector& p) {
      const ErfTerm t{p[0], p[1], p[2]};
      Vector r(n + 1);
      for (std::size_t i = 0; i < n; ++i) r[i] = term_value(t, 1.0, band.x[i]) - band.y[i];
      r[n] = anchor_weight * (2.0 * p[0] - band.rise);
      return r;
    };
    problem.jacobian = [&band, n, anchor_weight](const Vector& p) {
      const ErfTerm t{p[0], p[1], p[2]};
      Matrix jac(n + 1, 3);
      for (std::size_t i = 0; i < n; ++i) {
        const auto g = term_gradient(t, 1.0, band.x[i]);
        jac(i, 0) = g.d_amplitude;
        jac(i, 1) = g.d_center;
        jac(i, 2) = g.d_shape;
      }
      jac.row(n) << 2.0 * anchor_weight, 0.0, 0.0;
      return jac;
    };
    const double shape0 = extent > 0.0 ? 4.0 / extent : 4.0 / resolution;
    problem.initial = Vector{{0.5 * band.rise, midpoint, std::max(shape0, kMinShape)}};
    problem.lower_bounds = Vector{{0.0, -HUGE_VAL, kMinShape}};
    problem.options = options.solver;
    SolveResult solved;
    try {
      solved = solve(problem);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("band [") + std::to_string(level_lo) + ", " + std::to_string(level_hi) +
                                "]: " + e.what());
    }
    term = {solved.parameters[0], solved.parameters[1], solved.parameters[2]};
    fit.solver_iterations = solved.iterations;
  }
  fit.residual_norm = term_residual_norm(term, band);
  if (curve.side == Side::demand) term.center = -term.center;
  fit.term = term;
  return fit;
}

ErfTerm fit_segment(const StepCurve& curve, double level_lo, double level_hi, const FitOptions& options) {
  return fit_segment_detailed(curve, level_lo, level_hi, options).term;
}

FittedCurve fit_curve(const StepCurve& curve, int segments, SegmentationMethod method,
                      const FitOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  FittedCurve fitted;
  fitted.segmentation = segment_curve(curve, segments, method);
  fitted.model.side = curve.side;
  fitted.model.offset = curve.min_price();
  const auto& levels = fitted.segmentation.levels;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    try {
      fitted.segments.push_back(fit_segment_detailed(curve, levels[i], levels[i + 1], options));
    } catch (const Error& e) {
      throw Error(e.code(), "segment " + std::to_string(i) + ": " + e.what());
    }
    fitted.model.terms.push_back(fitted.segments.back().term);
  }
  fitted.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return fitted;
}

Equilibrium intersect_fitted(const ErfSumModel& supply, const ErfSumModel& demand, double q_max) {
  if (!(q_max >= 0.0) || !std::isfinite(q_max)) throw Error(Errc::invalid_argument, "q_max must be finite and >= 0");
  const auto gap = [&](double q) { return evaluate(demand, q) - evaluate(supply, q); };
  double lo = 0.0;
  double hi = q_max;
  const double h_lo = gap(lo);
  if (h_lo < 0.0) throw Error(Errc::no_intersection, "fitted demand lies below fitted supply at quantity 0");
  if (h_lo == 0.0) return {evaluate(supply, 0.0), 0.0, false};
  const double h_hi = gap(hi);
  if (h_hi > 0.0) throw Error(Errc::no_intersection_in_domain, "fitted curves do not cross before q_max");

  constexpr double kTolerance = 1e-9;
  double best_q = hi;
  double best_abs = std::abs(h_hi);
  if (h_lo < best_abs) {
    best_q = lo;
    best_abs = h_lo;
  }
  while (best_abs > kTolerance) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double h_mid = gap(mid);
    if (std::abs(h_mid) < best_abs) {
      best_q = mid;
      best_abs = std::abs(h_mid);
    }
    if (h_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {evaluate(supply, best_q), best_q, false};
}

double residual_rms(const StepCurve& curve, const ErfSumModel& model) {
  if (curve.points.empty()) throw Error(Errc::empty_curve, "curve is empty");
  double sum = 0.0;
  double prev_q = 0.0;
  for (const auto& pt : curve.points) {
    const double r = evaluate(model, 0.5 * (prev_q + pt.quantity)) - pt.price;
    sum += r * r;
    prev_q = pt.quantity;
  }
  return std::sqrt(sum / static_cast<double>(curve.points.size()));
}

nlohmann::ordered_json to_json(const FittedCurve& fitted) {
  nlohmann::ordered_json j;
  j["model"] = to_json(fitted.model);
  j["method"] = std::string(to_string(fitted.segmentation.method));
  j["levels"] = fitted.segmentation.levels;
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : fitted.segments) {
    segs.push_back(nlohmann::ordered_json{{"level_lo", s.level_lo},
                                          {"level_hi", s.level_hi},
                                          {"residual_norm", s.residual_norm},
                                          {"jumps", s.jumps},
                                          {"shortcut", s.shortcut},
                                          {"solver_iterations", s.solver_iterations}});
  }
  j["segments"] = std::move(segs);
  return j;
}

}  // namespace sdfit
