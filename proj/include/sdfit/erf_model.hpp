#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdfit/market_curves.hpp"

namespace sdfit {

/// Error function, relative error below 1e-12 on the whole real line.
double erf(double x) noexcept;

/// One smoothed price jump: a * (erf(s * c * (x - b)) + 1), s = +1 for
/// supply and -1 for demand. The total rise (or fall) of a term is 2a.
struct ErfTerm {
  double amplitude = 0.0;  // a, EUR, >= 0
  double center = 0.0;     // b, MW
  double shape = 1.0;      // c, 1/MW, > 0

  friend bool operator==(const ErfTerm&, const ErfTerm&) = default;
};

struct ModelProvenance {
  std::string date;  // ISO yyyy-mm-dd
  int hour = 0;
  int segments = 0;  // M

  friend bool operator==(const ModelProvenance&, const ModelProvenance&) = default;
};

/// offset + sum_i a_i (erf(s c_i (x - b_i)) + 1).
///
/// For supply the offset is the value at -infinity; for demand it is the
/// value at +infinity. Both coincide with the fitted curve's minimum price.
struct ErfSumModel {
  Side side = Side::supply;
  std::vector<ErfTerm> terms;
  double offset = 0.0;
  std::optional<ModelProvenance> provenance;

  double sign() const noexcept { return side == Side::supply ? 1.0 : -1.0; }

  friend bool operator==(const ErfSumModel&, const ErfSumModel&) = default;
};

/// Partials of the model value with respect to (a_i, b_i, c_i), laid out
/// term by term: [da_0, db_0, dc_0, da_1, ...].
struct TermGradient {
  double d_amplitude = 0.0;
  double d_center = 0.0;
  double d_shape = 0.0;
};

double evaluate(const ErfSumModel& model, double quantity) noexcept;
std::vector<TermGradient> gradient(const ErfSumModel& model, double quantity);
double model_derivative(const ErfSumModel& model, double quantity) noexcept;

/// Single-term helpers shared with the fitter.
double term_value(const ErfTerm& term, double sign, double x) noexcept;
TermGradient term_gradient(const ErfTerm& term, double sign, double x) noexcept;

nlohmann::ordered_json to_json(const ErfSumModel& model);
ErfSumModel model_from_json(const nlohmann::json& j);

}  // namespace sdfit
