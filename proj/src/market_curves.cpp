#include "sdfit/market_curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sdfit/error.hpp"

namespace sdfit {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::empty_curve: return "EmptyCurve";
    case Errc::invalid_layer: return "InvalidLayer";
    case Errc::no_intersection: return "NoIntersection";
    case Errc::no_intersection_in_domain: return "NoIntersectionInDomain";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::numerical_error: return "NumericalError";
    case Errc::invalid_problem: return "InvalidProblem";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::empty_segment: return "EmptySegment";
    case Errc::parse_error: return "ParseError";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::empty_report: return "EmptyReport";
    case Errc::invalid_input: return "InvalidInput";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Side side) noexcept {
  return side == Side::supply ? "supply" : "demand";
}

Side side_from_string(std::string_view text) {
  if (text == "supply") return Side::supply;
  if (text == "demand") return Side::demand;
  throw Error(Errc::invalid_argument, "unknown side '" + std::string(text) + "'");
}

void validate_layer(const BidLayer& layer) {
  if (!std::isfinite(layer.volume) || layer.volume < 0.0) {
    throw Error(Errc::invalid_layer, "volume must be finite and >= 0, got " + std::to_string(layer.volume));
  }
  if (!std::isfinite(layer.price) || layer.price < 0.0 || layer.price > kMarketMaxPrice) {
    throw Error(Errc::invalid_layer, "price must lie in [0, 3000], got " + std::to_string(layer.price));
  }
}

double StepCurve::min_price() const {
  if (points.empty()) throw Error(Errc::empty_curve, "curve has no breakpoints");
  return side == Side::supply ? points.front().price : points.back().price;
}

double StepCurve::max_price() const {
  if (points.empty()) throw Error(Errc::empty_curve, "curve has no breakpoints");
  return side == Side::supply ? points.back().price : points.front().price;
}

bool is_valid(const StepCurve& curve) {
  if (curve.points.empty()) return false;
  double prev_q = 0.0;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const auto& pt = curve.points[k];
    if (!std::isfinite(pt.quantity) || !std::isfinite(pt.price)) return false;
    if (pt.quantity <= prev_q) return false;
    if (k > 0) {
      const double prev_p = curve.points[k - 1].price;
      if (pt.price == prev_p) return false;
      if (curve.side == Side::supply && pt.price < prev_p) return false;
      if (curve.side == Side::demand && pt.price > prev_p) return false;
    }
    prev_q = pt.quantity;
  }
  return true;
}

namespace {

// Layers must already be ordered by the side's price order. Equal prices are
// merged before cumulation so that splitting a layer never changes the
// cumulative quantities.
StepCurve cumulate(Side side, std::span<const BidLayer> ordered) {
  StepCurve curve{side, {}};
  double cumulative = 0.0;
  std::size_t i = 0;
  while (i < ordered.size()) {
    const double price = ordered[i].price;
    double volume = 0.0;
    for (; i < ordered.size() && ordered[i].price == price; ++i) volume += ordered[i].volume;
    if (volume <= 0.0) continue;
    cumulative += volume;
    if (!curve.points.empty() && curve.points.back().price == price) {
      curve.points.back().quantity = cumulative;
    } else {
      curve.points.push_back({cumulative, price});
    }
  }
  if (curve.points.empty()) throw Error(Errc::empty_curve, "all layers have zero volume");
  return curve;
}

std::vector<BidLayer> checked_copy(std::span<const BidLayer> layers, Side side) {
  if (layers.empty()) throw Error(Errc::empty_curve, "no layers given");
  std::vector<BidLayer> out(layers.begin(), layers.end());
  for (const auto& layer : out) {
    if (layer.side != side) {
      throw Error(Errc::invalid_layer, std::string("expected ") + std::string(to_string(side)) + " layer");
    }
    validate_layer(layer);
  }
  return out;
}

}  // namespace

StepCurve build_supply_curve(std::span<const BidLayer> layers) {
  auto sorted = checked_copy(layers, Side::supply);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const BidLayer& a, const BidLayer& b) { return a.price < b.price; });
  return cumulate(Side::supply, sorted);
}

StepCurve build_demand_curve(std::span<const BidLayer> layers) {
  auto sorted = checked_copy(layers, Side::demand);
  for (auto& layer : sorted) {
    if (layer.price == 0.0) layer.price = kMarketMaxPrice;
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const BidLayer& a, const BidLayer& b) { return a.price > b.price; });
  return cumulate(Side::demand, sorted);
}

Equilibrium clear_market(const StepCurve& supply, const StepCurve& demand) {
  if (supply.points.empty() || demand.points.empty()) {
    throw Error(Errc::empty_curve, "clear_market needs two non-empty curves");
  }
  const auto& s = supply.points;
  const auto& d = demand.points;
  if (d.front().price < s.front().price) {
    throw Error(Errc::no_intersection, "demand lies below supply at quantity 0");
  }
  const double q_max = std::min(supply.total_quantity(), demand.total_quantity());

  // Walk the merged quantity intervals (x_prev, x_next] on which both curves
  // are constant. Demand minus supply is nonincreasing, so the feasible set
  // is a prefix of these intervals.
  std::size_t i = 0;
  std::size_t j = 0;
  double q_star = 0.0;
  bool tied = false;
  for (;;) {
    const double x_next = std::min(s[i].quantity, d[j].quantity);
    if (d[j].price < s[i].price) break;
    q_star = x_next;
    tied = d[j].price == s[i].price;
    if (x_next >= q_max) break;
    if (s[i].quantity == x_next) ++i;
    if (d[j].quantity == x_next) ++j;
  }

  // Indices now point at the interval ending at q_star (or the first
  // infeasible one after it); recover the prices on both sides of q_star.
  const auto price_left = [](const std::vector<Breakpoint>& pts, double q) {
    return std::lower_bound(pts.begin(), pts.end(), q,
                            [](const Breakpoint& b, double v) { return b.quantity < v; })
        ->price;
  };
  const auto price_right = [](const std::vector<Breakpoint>& pts, double q, double beyond) {
    auto it = std::upper_bound(pts.begin(), pts.end(), q,
                               [](double v, const Breakpoint& b) { return v < b.quantity; });
    return it == pts.end() ? beyond : it->price;
  };
  const double supply_left = price_left(s, q_star);
  const double demand_right = price_right(d, q_star, -std::numeric_limits<double>::infinity());
  return {std::max(supply_left, demand_right), q_star, tied};
}

StepCurve truncate_curve(const StepCurve& curve, double price_cap) {
  if (!(price_cap > 0.0)) throw Error(Errc::invalid_argument, "price cap must be > 0");
  StepCurve out{curve.side, {}};
  out.points.reserve(curve.points.size());
  if (curve.side == Side::supply) {
    for (const auto& pt : curve.points) {
      if (pt.price > price_cap) break;
      out.points.push_back(pt);
    }
  } else {
    for (const auto& pt : curve.points) {
      const double price = std::min(pt.price, price_cap);
      if (!out.points.empty() && out.points.back().price == price) {
        out.points.back().quantity = pt.quantity;
      } else {
        out.points.push_back({pt.quantity, price});
      }
    }
  }
  if (out.points.empty()) throw Error(Errc::empty_curve, "no breakpoints left below the price cap");
  return out;
}

double eval_step(const StepCurve& curve, double quantity) {
  if (curve.points.empty()) throw Error(Errc::empty_curve, "cannot evaluate an empty curve");
  if (!(quantity >= 0.0) || quantity > curve.total_quantity()) {
    throw Error(Errc::out_of_domain, "quantity " + std::to_string(quantity) + " outside [0, " +
                                         std::to_string(curve.total_quantity()) + "]");
  }
  auto it = std::lower_bound(curve.points.begin(), curve.points.end(), quantity,
                             [](const Breakpoint& b, double v) { return b.quantity < v; });
  return it->price;
}

}  // namespace sdfit
