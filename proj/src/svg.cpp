#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "sdfit/analytics.hpp"
#include "sdfit/error.hpp"

namespace sdfit {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void render_curve_svg(const StepCurve& step, const ErfSumModel& model, const std::filesystem::path& path,
                      int samples) {
  if (step.points.empty()) throw Error(Errc::empty_curve, "nothing to render");
  if (step.side != model.side) throw Error(Errc::invalid_argument, "step curve and model belong to different sides");
  samples = std::max(samples, 500);

  const double q_end = step.total_quantity();
  std::vector<double> fitted(static_cast<std::size_t>(samples));
  double y_lo = step.min_price();
  double y_hi = step.max_price();
  for (int i = 0; i < samples; ++i) {
    const double q = q_end * i / (samples - 1);
    fitted[static_cast<std::size_t>(i)] = evaluate(model, q);
    y_lo = std::min(y_lo, fitted[static_cast<std::size_t>(i)]);
    y_hi = std::max(y_hi, fitted[static_cast<std::size_t>(i)]);
  }
  if (y_hi - y_lo < 1e-9) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto sx = [&](double q) { return kLeft + plot_w * q / q_end; };
  const auto sy = [&](double p) { return kTop + plot_h * (y_hi - p) / (y_hi - y_lo); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << to_string(step.side) << " curve: step data vs " << model.terms.size() << "-term erf fit</text>\n";

  // Axes with five ticks each.
  out << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\"/>\n</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= 5; ++t) {
    const double q = q_end * t / 5.0;
    const double p = y_lo + (y_hi - y_lo) * t / 5.0;
    out << "<text x=\"" << fixed(sx(q)) << "\" y=\"" << fixed(kTop + plot_h + 16) << "\" text-anchor=\"middle\">"
        << fixed(q, 0) << "</text>\n"
        << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(sy(p) + 4) << "\" text-anchor=\"end\">"
        << fixed(p, 1) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">Quantity (MW)</text>\n"
      << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">Price (EUR)</text>\n</g>\n";

  // Two vertices per breakpoint: the left and right end of its step.
  out << "<path id=\"step\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" d=\"";
  double prev_q = 0.0;
  bool first = true;
  for (const auto& pt : step.points) {
    out << (first ? "M" : " L") << fixed(sx(prev_q), 3) << ',' << fixed(sy(pt.price), 3) << " L"
        << fixed(sx(pt.quantity), 3) << ',' << fixed(sy(pt.price), 3);
    first = false;
    prev_q = pt.quantity;
  }
  out << "\"/>\n";

  out << "<polyline id=\"fit\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
  for (int i = 0; i < samples; ++i) {
    const double q = q_end * i / (samples - 1);
    out << (i ? " " : "") << fixed(sx(q), 3) << ',' << fixed(sy(fitted[static_cast<std::size_t>(i)]), 3);
  }
  out << "\"/>\n</svg>\n";
  if (!out) throw Error(Errc::io_error, "write failed for '" + path.string() + "'");
}

}  // namespace sdfit
