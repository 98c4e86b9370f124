#include "sdfit/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <atomic>
#include <chrono>
#include <thread>

#include "sdfit/error.hpp"

namespace sdfit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

HourRecord process_hour(const HourlyAuction& auction, const FitSettings& settings, bool keep_models) {
  HourRecord rec;
  rec.date = auction.date;
  rec.hour = auction.hour;
  if (!auction.fittable()) {
    rec.skip_reason = auction.offers.empty() ? "no offer layers" : "no bid layers";
    return rec;
  }
  try {
    auto started = Clock::now();
    const StepCurve supply = build_supply_curve(auction.offers);
    const StepCurve demand = build_demand_curve(auction.bids);
    const Equilibrium exact = clear_market(supply, demand);
    rec.price = exact.price;
    rec.quantity = exact.quantity;
    rec.above_cap = exact.price > settings.price_cap;
    const StepCurve supply_cut = truncate_curve(supply, settings.price_cap);
    const StepCurve demand_cut = truncate_curve(demand, settings.price_cap);
    rec.build_seconds = seconds_since(started);

    started = Clock::now();
    const FittedCurve supply_fit = fit_curve(supply_cut, settings.m_supply, settings.method, settings.options);
    const FittedCurve demand_fit = fit_curve(demand_cut, settings.m_demand, settings.method, settings.options);
    rec.fit_seconds = seconds_since(started);

    started = Clock::now();
    const double q_max = std::min(supply_cut.total_quantity(), demand_cut.total_quantity());
    const Equilibrium approx = intersect_fitted(supply_fit.model, demand_fit.model, q_max);
    rec.intersect_seconds = seconds_since(started);

    rec.price_appr = approx.price;
    rec.quantity_appr = approx.quantity;
    rec.abs_error = std::abs(rec.price - rec.price_appr);
    rec.processed = true;
    if (keep_models) {
      rec.supply_model = supply_fit.model;
      rec.demand_model = demand_fit.model;
      const ModelProvenance base{format_date(auction.date), auction.hour, 0};
      rec.supply_model->provenance = base;
      rec.supply_model->provenance->segments = settings.m_supply;
      rec.demand_model->provenance = base;
      rec.demand_model->provenance->segments = settings.m_demand;
    }
  } catch (const Error& e) {
    rec.processed = false;
    rec.skip_reason = e.what();
  }
  return rec;
}

}  // namespace

FitReport run_batch(const Corpus& corpus, const FitSettings& settings, const BatchOptions& options) {
  validate(settings);
  if (corpus.hours.empty()) throw Error(Errc::empty_corpus, "corpus has no hours");
  if (options.workers < 1) throw Error(Errc::invalid_argument, "workers must be >= 1");

  const auto started = Clock::now();
  FitReport report;
  report.config = settings;
  report.records.resize(corpus.hours.size());

  const std::size_t n = corpus.hours.size();
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.workers), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) report.records[i] = process_hour(corpus.hours[i], settings, options.keep_models);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          report.records[i] = process_hour(corpus.hours[i], settings, options.keep_models);
        }
      });
    }
  }

  double sum = 0.0;
  for (const auto& rec : report.records) {
    if (!rec.processed) {
      ++report.skipped;
      continue;
    }
    ++report.processed;
    sum += rec.abs_error;
    report.max_abs_error = std::max(report.max_abs_error, rec.abs_error);
  }
  if (report.processed == 0) throw Error(Errc::empty_report, "every hour was skipped");
  report.mean_abs_error = sum / static_cast<double>(report.processed);
  report.total_seconds = seconds_since(started);
  return report;
}

LayerCountStats layer_stats(const Corpus& corpus) {
  if (corpus.hours.empty()) throw Error(Errc::empty_corpus, "corpus has no hours");
  struct Sums {
    double offers = 0.0;
    double bids = 0.0;
    std::size_t hours = 0;
  };
  std::map<int, Sums> hour_sums, weekday_sums, month_sums;
  for (const auto& h : corpus.hours) {
    const auto iso_weekday = static_cast<int>(std::chrono::weekday{std::chrono::sys_days{h.date}}.iso_encoding());
    const auto month = static_cast<int>(static_cast<unsigned>(h.date.month()));
    for (auto* sums : {&hour_sums[h.hour], &weekday_sums[iso_weekday], &month_sums[month]}) {
      sums->offers += static_cast<double>(h.offers.size());
      sums->bids += static_cast<double>(h.bids.size());
      ++sums->hours;
    }
  }
  const auto means = [](const std::map<int, Sums>& sums) {
    std::map<int, LayerMeans> out;
    for (const auto& [key, s] : sums) {
      const auto n = static_cast<double>(s.hours);
      out[key] = {s.offers / n, s.bids / n, s.hours};
    }
    return out;
  };
  return {means(hour_sums), means(weekday_sums), means(month_sums)};
}

namespace {

struct Accumulator {
  double min = HUGE_VAL;
  double max = -HUGE_VAL;
  double sum = 0.0;

  void add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
  }
  // Rounding can push the mean a hair outside [min, max] for identical
  // values; clamp so the ordering invariant holds exactly.
  MinMeanMax finish(std::size_t n) const { return {min, std::clamp(sum / static_cast<double>(n), min, max), max}; }
};

}  // namespace

CoefficientStats coefficient_stats(std::span<const ErfSumModel> models) {
  if (models.empty()) throw Error(Errc::invalid_input, "no models given");
  CoefficientStats stats;
  stats.side = models.front().side;
  stats.models = models.size();
  const std::size_t terms = models.front().terms.size();
  std::vector<std::array<Accumulator, 3>> acc(terms);
  for (const auto& m : models) {
    if (m.terms.size() != terms) {
      throw Error(Errc::invalid_input, "mixed term counts: " + std::to_string(terms) + " vs " +
                                           std::to_string(m.terms.size()));
    }
    if (m.side != stats.side) throw Error(Errc::invalid_input, "mixed supply and demand models");
    for (std::size_t i = 0; i < terms; ++i) {
      acc[i][0].add(m.terms[i].amplitude);
      acc[i][1].add(m.terms[i].center);
      acc[i][2].add(m.terms[i].shape);
    }
  }
  for (const auto& a : acc) {
    stats.terms.push_back({a[0].finish(models.size()), a[1].finish(models.size()), a[2].finish(models.size())});
  }
  return stats;
}

CoefficientStats coefficient_stats(std::span<const FittedCurve> fitted) {
  std::vector<ErfSumModel> models;
  models.reserve(fitted.size());
  for (const auto& f : fitted) models.push_back(f.model);
  return coefficient_stats(models);
}

ReportFormat format_from_string(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw Error(Errc::invalid_argument, "unknown report format '" + std::string(text) + "'");
}

}  // namespace sdfit
