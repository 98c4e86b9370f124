#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace sdfit {

inline constexpr double kMarketMaxPrice = 3000.0;

enum class Side { supply, demand };

std::string_view to_string(Side side) noexcept;
Side side_from_string(std::string_view text);

/// One aggregated price layer of an hourly auction.
struct BidLayer {
  double volume = 0.0;  // MW
  double price = 0.0;   // EUR
  Side side = Side::supply;

  friend bool operator==(const BidLayer&, const BidLayer&) = default;
};

/// Throws Errc::invalid_layer unless volume >= 0 and price lies in [0, 3000].
void validate_layer(const BidLayer& layer);

struct Breakpoint {
  double quantity = 0.0;  // cumulative MW
  double price = 0.0;     // EUR

  friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

/// Monotone piecewise-constant cumulative curve.
///
/// Breakpoint k carries price p_k on the quantity interval (q_{k-1}, q_k],
/// with q_0 = 0 (the first step also covers quantity 0). Quantities are
/// strictly increasing, consecutive prices differ, and prices are
/// nondecreasing for supply / nonincreasing for demand.
struct StepCurve {
  Side side = Side::supply;
  std::vector<Breakpoint> points;

  double total_quantity() const { return points.empty() ? 0.0 : points.back().quantity; }
  double min_price() const;
  double max_price() const;

  friend bool operator==(const StepCurve&, const StepCurve&) = default;
};

/// True when `curve` satisfies every StepCurve invariant.
bool is_valid(const StepCurve& curve);

struct Equilibrium {
  double price = 0.0;     // EUR
  double quantity = 0.0;  // MW
  bool degenerate = false;

  friend bool operator==(const Equilibrium&, const Equilibrium&) = default;
};

StepCurve build_supply_curve(std::span<const BidLayer> layers);

/// Zero-price bids are price takers and move to the market maximum price
/// before sorting.
StepCurve build_demand_curve(std::span<const BidLayer> layers);

/// Intersection of the two staircases.
///
/// The clearing quantity is the largest q in [0, min(Q_supply, Q_demand)]
/// with demand(q) >= supply(q). The clearing price is the lowest price on
/// the vertical overlap of both curves at that quantity: the supply price
/// when demand drops below it, the demand price when the crossing lies on a
/// vertical supply jump. When both curves share a price over the last
/// quantity interval the result is flagged degenerate and the quantity is
/// the interval's right end.
Equilibrium clear_market(const StepCurve& supply, const StepCurve& demand);

/// Supply drops steps priced above the cap, demand clamps them to the cap.
StepCurve truncate_curve(const StepCurve& curve, double price_cap);

/// Right-continuous step evaluation: price of the first breakpoint whose
/// cumulative quantity is >= `quantity`.
double eval_step(const StepCurve& curve, double quantity);

}  // namespace sdfit
