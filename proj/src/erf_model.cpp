#include "sdfit/erf_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "sdfit/error.hpp"

namespace sdfit {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)).
// All terms are positive, so there is no cancellation for moderate x.
double erf_series(double x) noexcept {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return kTwoOverSqrtPi * std::exp(-x2) * sum;
}

// erfc(x) for x > 0 from the continued fraction
//   erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz method.
double erfc_continued_fraction(double x) noexcept {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double an = 0.5 * n;
    d = x + an * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) * std::numbers::inv_sqrtpi / f;
}

}  // namespace

double erf(double x) noexcept {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  double value;
  if (ax < 2.5) {
    value = erf_series(ax);
  } else if (ax < 6.5) {
    value = 1.0 - erfc_continued_fraction(ax);
  } else {
    value = 1.0;
  }
  return x < 0.0 ? -value : value;
}

double term_value(const ErfTerm& term, double sign, double x) noexcept {
  return term.amplitude * (erf(sign * term.shape * (x - term.center)) + 1.0);
}

TermGradient term_gradient(const ErfTerm& term, double sign, double x) noexcept {
  const double dx = x - term.center;
  const double z = term.shape * dx;
  const double bump = kTwoOverSqrtPi * std::exp(-z * z);
  return {
      erf(sign * z) + 1.0,
      -term.amplitude * sign * term.shape * bump,
      term.amplitude * sign * dx * bump,
  };
}

double evaluate(const ErfSumModel& model, double quantity) noexcept {
  const double s = model.sign();
  double value = model.offset;
  for (const auto& term : model.terms) value += term_value(term, s, quantity);
  return value;
}

std::vector<TermGradient> gradient(const ErfSumModel& model, double quantity) {
  std::vector<TermGradient> out;
  out.reserve(model.terms.size());
  for (const auto& term : model.terms) out.push_back(term_gradient(term, model.sign(), quantity));
  return out;
}

double model_derivative(const ErfSumModel& model, double quantity) noexcept {
  const double s = model.sign();
  double slope = 0.0;
  for (const auto& term : model.terms) {
    const double z = term.shape * (quantity - term.center);
    slope += term.amplitude * term.shape * kTwoOverSqrtPi * std::exp(-z * z);
  }
  return s * slope;
}

nlohmann::ordered_json to_json(const ErfSumModel& model) {
  nlohmann::ordered_json j;
  j["side"] = std::string(to_string(model.side));
  j["offset"] = model.offset;
  auto terms = nlohmann::ordered_json::array();
  for (const auto& t : model.terms) {
    terms.push_back(nlohmann::ordered_json{{"a", t.amplitude}, {"b", t.center}, {"c", t.shape}});
  }
  j["terms"] = std::move(terms);
  if (model.provenance) {
    j["provenance"] = nlohmann::ordered_json{{"date", model.provenance->date},
                                             {"hour", model.provenance->hour},
                                             {"M", model.provenance->segments}};
  }
  return j;
}

ErfSumModel model_from_json(const nlohmann::json& j) {
  try {
    ErfSumModel model;
    model.side = side_from_string(j.at("side").get<std::string>());
    model.offset = j.at("offset").get<double>();
    for (const auto& t : j.at("terms")) {
      ErfTerm term{t.at("a").get<double>(), t.at("b").get<double>(), t.at("c").get<double>()};
      if (!(term.amplitude >= 0.0) || !(term.shape > 0.0) || !std::isfinite(term.center)) {
        throw Error(Errc::invalid_input, "term requires a >= 0, c > 0 and finite b");
      }
      model.terms.push_back(term);
    }
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      model.provenance = ModelProvenance{p.at("date").get<std::string>(), p.at("hour").get<int>(),
                                         p.at("M").get<int>()};
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_input, std::string("malformed model record: ") + e.what());
  }
}

}  // namespace sdfit
