// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.
// Every threshold below is the one the criterion states, nothing looser.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "sdfit/analytics.hpp"
#include "sdfit/error.hpp"
#include "sdfit/lm_solver.hpp"
#include "sdfit/text.hpp"

namespace fs = std::filesystem;
using namespace sdfit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-38s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Corpus synthetic(int hours, std::uint64_t seed) {
  GeneratorConfig g;
  g.hours = hours;
  g.seed = seed;
  return generate_synthetic_corpus(g);
}

// 1. Exact clearing vs the exhaustive breakpoint scan.
void clearing_oracle() {
  std::mt19937_64 rng(2024);
  // Half small integer-grid pairs, which are full of ties and shared
  // plateaus; half realistic synthetic hours with decimal data.
  const Corpus corpus = synthetic(5000, 77);
  std::size_t mismatches = 0, crossed = 0, pairs = 0;
  double clearing_seconds = 0.0;
  const auto check = [&](const std::vector<BidLayer>& offers, const std::vector<BidLayer>& bids) {
    const auto t0 = Clock::now();
    const StepCurve s = build_supply_curve(offers);
    const StepCurve d = build_demand_curve(bids);
    bool threw = false;
    Equilibrium got;
    try {
      got = clear_market(s, d);
    } catch (const Error& e) {
      threw = e.code() == Errc::no_intersection;
    }
    clearing_seconds += seconds_since(t0);
    const auto want = oracle::clear_by_scan(s, d);
    ++pairs;
    if (want.crossed) {
      ++crossed;
      if (threw || !(got == want.result)) ++mismatches;
    } else if (!threw) {
      ++mismatches;
    }
  };
  for (int i = 0; i < 5000; ++i) {
    check(oracle::random_layers(rng, Side::supply, 40, 60), oracle::random_layers(rng, Side::demand, 40, 60));
  }
  for (const auto& h : corpus.hours) check(h.offers, h.bids);
  report(1, "clearing == breakpoint-scan oracle", mismatches == 0 && pairs == 10000 && clearing_seconds < 10.0,
         std::to_string(pairs) + " pairs (" + std::to_string(crossed) + " crossing), " + std::to_string(mismatches) +
             " mismatches, " + fmt("%.3f s (limit 10 s)", clearing_seconds));
}

// 2. erf against the 50-digit Maclaurin series.
void erf_accuracy() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  double worst = 0.0, worst_x = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    const double ref = oracle::erf_series(x);
    const double rel = std::abs(sdfit::erf(x) - ref) / std::abs(ref);
    if (rel > worst) {
      worst = rel;
      worst_x = x;
    }
  }
  report(2, "erf relative error <= 1e-12", worst <= 1e-12, fmt("10000 points, max %.3g at x=%.6f", worst, worst_x));
}

// 3. Analytic gradient against Richardson central differences. Each model
// is built around x so every term's partials are well above the rounding
// floor of the difference quotient, and every partial is held to 1e-6.
void gradient_check() {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  std::size_t partials = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = 40000 * u(rng);
    ErfSumModel m{trial % 2 ? Side::supply : Side::demand, {}, 5 * u(rng), std::nullopt};
    const int terms = 1 + trial % 5;
    for (int k = 0; k < terms; ++k) {
      const double c = 1e-3 + 0.2 * u(rng);
      const double z = (0.01 + 2.99 * u(rng)) * (u(rng) < 0.5 ? -1 : 1);
      m.terms.push_back({0.5 + 30 * u(rng), x - z / c, c});
    }
    const auto g = gradient(m, x);
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
      const double an[3] = {g[i].d_amplitude, g[i].d_center, g[i].d_shape};
      for (int which = 0; which < 3; ++which) {
        const double fd = oracle::fd_partial(m, i, which, x);
        worst = std::max(worst, std::abs(an[which] - fd) / std::abs(fd));
        ++partials;
      }
    }
  }
  report(3, "gradient vs finite differences", worst <= 1e-6,
         "1000 (model, x) pairs, " + std::to_string(partials) + fmt(" partials, max rel %.3g (limit 1e-6)", worst));
}

struct CorpusFits {
  std::vector<std::pair<StepCurve, FittedCurve>> fits;
};

CorpusFits fit_corpus(const Corpus& corpus) {
  CorpusFits out;
  for (const auto& h : corpus.hours) {
    const auto supply = truncate_curve(build_supply_curve(h.offers), kDefaultPriceCap);
    const auto demand = truncate_curve(build_demand_curve(h.bids), kDefaultPriceCap);
    for (auto method : {SegmentationMethod::plateau, SegmentationMethod::uniform}) {
      out.fits.emplace_back(supply, fit_curve(supply, 15, method));
      out.fits.emplace_back(demand, fit_curve(demand, 5, method));
    }
  }
  return out;
}

// 4. Monotone fitted models on a 10^3 grid.
void monotonicity(const CorpusFits& corpus) {
  std::size_t violations = 0;
  double worst = 0.0;
  for (const auto& [step, fitted] : corpus.fits) {
    const double q_end = step.total_quantity();
    const double sign = fitted.model.sign();
    double prev = evaluate(fitted.model, 0.0);
    for (int i = 1; i < 1000; ++i) {
      const double v = evaluate(fitted.model, q_end * i / 999.0);
      const double drop = sign * (prev - v);  // positive when the model moves the wrong way
      if (drop > 1e-9) ++violations;
      worst = std::max(worst, drop);
      prev = v;
    }
  }
  report(4, "fitted models monotone", violations == 0,
         std::to_string(corpus.fits.size()) + " models, " + std::to_string(violations) +
             fmt(" violations beyond 1e-9, worst wrong-way move %.3g", worst));
}

// 5. Modeled rise 2a vs step rise per segment.
void rise_conservation(const CorpusFits& corpus) {
  std::size_t segments = 0, bad = 0;
  double worst = 0.0;
  for (const auto& [step, fitted] : corpus.fits) {
    for (const auto& seg : fitted.segments) {
      const double rise = seg.level_hi - seg.level_lo;
      const double rel = std::abs(2 * seg.term.amplitude - rise) / rise;
      worst = std::max(worst, rel);
      if (rel > 0.05) ++bad;
      ++segments;
    }
  }
  report(5, "rise conserved within 5%", bad == 0,
         std::to_string(segments) + " segments, " + std::to_string(bad) + fmt(" outside, worst %.4f%%", 100 * worst));
}

// 6. Error trend over M_supply at M_demand = 5.
void trend() {
  const auto t0 = Clock::now();
  const Corpus corpus = synthetic(200, 2017);
  double mean[3];
  const int ms[3] = {5, 15, 25};
  for (int i = 0; i < 3; ++i) {
    FitSettings s;
    s.m_supply = ms[i];
    s.m_demand = 5;
    mean[i] = run_batch(corpus, s).mean_abs_error;
  }
  const double elapsed = seconds_since(t0);
  const double change = std::abs(mean[2] - mean[1]) / mean[1];
  const bool ok = mean[1] < mean[0] && change < 0.25 && elapsed < 600.0;
  report(6, "error trend over M_supply 5/15/25", ok,
         fmt("mean |P-P_appr| %.4f -> %.4f -> %.4f EUR", mean[0], mean[1], mean[2]) +
             fmt(", 15->25 change %.1f%% (limit 25%%), %.1f s", 100 * change, elapsed));
}

// Quantity extent of a band's data: from the last step at or below `lo` to
// the first step at or above `hi`, walking in the direction prices rise.
std::pair<double, double> band_edges(const StepCurve& c, double lo, double hi) {
  struct Step {
    double left, right, price;
  };
  std::vector<Step> steps;
  double prev = 0.0;
  for (const auto& p : c.points) {
    steps.push_back({prev, p.quantity, p.price});
    prev = p.quantity;
  }
  if (c.side == Side::demand) std::reverse(steps.begin(), steps.end());
  std::size_t first = 0, last = steps.size() - 1;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].price <= lo) first = k;
  }
  for (std::size_t k = steps.size(); k-- > 0;) {
    if (steps[k].price >= hi) last = k;
  }
  const double a = c.side == Side::supply ? steps[first].left : steps[first].right;
  const double b = c.side == Side::supply ? steps[last].right : steps[last].left;
  return {std::min(a, b), std::max(a, b)};
}

// 7. Shortcut vs full LM on every single-jump band of a corpus.
void shortcut_equivalence() {
  const Corpus corpus = synthetic(48, 9);
  FitOptions lm_only;
  lm_only.single_jump_shortcut = false;
  std::size_t bands = 0;
  double worst = 0.0;
  for (const auto& h : corpus.hours) {
    for (const auto& step : {truncate_curve(build_supply_curve(h.offers), kDefaultPriceCap),
                             truncate_curve(build_demand_curve(h.bids), kDefaultPriceCap)}) {
      for (auto method : {SegmentationMethod::plateau, SegmentationMethod::uniform}) {
        for (int m : {5, 15, 25}) {
          const auto fitted = fit_curve(step, m, method);
          for (const auto& seg : fitted.segments) {
            if (!seg.shortcut) continue;
            const auto lm = fit_segment_detailed(step, seg.level_lo, seg.level_hi, lm_only);
            const auto [left, right] = band_edges(step, seg.level_lo, seg.level_hi);
            const double sign = step.side == Side::supply ? 1.0 : -1.0;
            for (double x : {left, right}) {
              worst = std::max(worst, std::abs(term_value(seg.term, sign, x) - term_value(lm.term, sign, x)));
            }
            ++bands;
          }
        }
      }
    }
  }
  report(7, "single-jump shortcut == LM at edges", bands > 0 && worst <= 0.1,
         std::to_string(bands) + fmt(" single-jump bands, max edge difference %.3g EUR (limit 0.1)", worst));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. `batch` through the real command line, serial and parallel, twice each.
void determinism() {
  const fs::path dir = fs::temp_directory_path() / "sdfit_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({"fit":{"m_supply":10,"m_demand":5},"generator":{"hours":48,"seed":31}})";
  std::vector<std::string> outputs;
  bool all_ran = true;
  int run = 0;
  for (const char* format : {"csv", "json"}) {
    for (int workers : {1, 3, 1, 4}) {
      const fs::path out = dir / ("run" + std::to_string(run++) + "." + format);
      const std::string cmd = std::string("\"") + SDFIT_CLI + "\" batch --config \"" + (dir / "config.json").string() +
                              "\" --workers " + std::to_string(workers) + " --format " + format + " --out \"" +
                              out.string() + "\" 2>/dev/null";
      all_ran = all_ran && std::system(cmd.c_str()) == 0;
      outputs.push_back(slurp(out));
    }
  }
  bool same = all_ran;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::size_t base = i < 4 ? 0 : 4;
    same = same && !outputs[i].empty() && outputs[i] == outputs[base];
  }
  report(8, "batch output byte-identical", same,
         all_ran ? "csv and json, workers 1/3/1/4, 48 hours" : "a CLI run exited non-zero");
}

// 9. sample fixture through the parser and the curve builder.
void fixture() {
  const auto corpus =
      load_corpus(fs::path(SDFIT_TEST_DATA) / "sample_offers.csv", fs::path(SDFIT_TEST_DATA) / "sample_bids.csv");
  const auto& first = corpus.hours.front();
  const auto curve = build_supply_curve(first.offers);
  const char* want[] = {"13392.7", "13417.7", "13531.5"};
  bool ok = first.hour == 1 && format_date(first.date) == "2017-01-01" && curve.points.size() >= 3;
  std::string got;
  for (int i = 0; ok && i < 3; ++i) {
    const std::string text = format_double(curve.points[i].quantity);
    ok = text == want[i] && curve.points[i].quantity == parse_double(want[i]);
    got += (i ? ", " : "") + text;
  }
  report(9, "sample fixture breakpoints", ok, "cumulated quantities " + got);
}

// 10. Exponential decay recovery, plus the process-wide descent audit that
// covers every LM solve made by criteria 4-7 as well.
void solver_sanity() {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 40; ++i) {
    xs.push_back(0.25 * i);
    ys.push_back(2.0 * std::exp(-0.5 * xs.back()));
  }
  LeastSquaresProblem p;
  p.residual = [&](const Vector& q) {
    Vector r(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) r[static_cast<Eigen::Index>(i)] = q[0] * std::exp(-q[1] * xs[i]) - ys[i];
    return r;
  };
  p.initial = Vector{{1.0, 1.0}};
  const auto r = solve(p);
  bool monotone = true;
  for (std::size_t i = 1; i < r.cost_history.size(); ++i) monotone = monotone && r.cost_history[i] <= r.cost_history[i - 1];
  const double err = std::max(std::abs(r.parameters[0] - 2.0), std::abs(r.parameters[1] - 0.5));
  const auto d = solver_diagnostics();
  report(10, "LM recovers (2, 0.5), never ascends", err <= 1e-8 && monotone && d.descent_violations == 0,
         fmt("max param error %.3g (limit 1e-8), ", err) + std::to_string(d.solves) + " solves, " +
             std::to_string(d.accepted_steps) + " accepted steps, " + std::to_string(d.descent_violations) +
             " cost increases");
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::function<void()>> early{clearing_oracle, erf_accuracy, gradient_check};
  for (const auto& f : early) {
    try {
      f();
    } catch (const std::exception& e) {
      std::printf("[FAIL] unexpected exception: %s\n", e.what());
      ++failures;
    }
  }
  try {
    const auto fits = fit_corpus(synthetic(500, 500));
    monotonicity(fits);
    rise_conservation(fits);
  } catch (const std::exception& e) {
    report(4, "fitted models monotone", false, e.what());
    report(5, "rise conserved within 5%", false, e.what());
  }
  const std::vector<std::pair<int, std::function<void()>>> late{
      {6, trend}, {7, shortcut_equivalence}, {8, determinism}, {9, fixture}, {10, solver_sanity}};
  for (const auto& [id, f] : late) {
    try {
      f();
    } catch (const std::exception& e) {
      report(id, "criterion threw", false, e.what());
    }
  }
  std::printf("%d of 10 criteria failed, %.1f s\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
