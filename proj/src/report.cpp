#include <fstream>
#include <sstream>

#include "sdfit/analytics.hpp"
#include "sdfit/error.hpp"
#include "sdfit/text.hpp"

namespace sdfit {

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

nlohmann::ordered_json stats_json(const MinMeanMax& s) {
  return {{"min", s.min}, {"mean", s.mean}, {"max", s.max}};
}

nlohmann::ordered_json means_json(const std::map<int, LayerMeans>& by_key) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [key, m] : by_key) {
    arr.push_back({{"key", key}, {"offers_mean", m.offers}, {"bids_mean", m.bids}, {"hours", m.hours}});
  }
  return arr;
}

}  // namespace

std::string render_report(const FitReport& report, ReportFormat format, const EmitOptions& options) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["config"] = to_json(report.config);
    nlohmann::ordered_json agg{{"hours", report.records.size()},
                               {"processed", report.processed},
                               {"skipped", report.skipped},
                               {"mean_abs_error", report.mean_abs_error},
                               {"max_abs_error", report.max_abs_error}};
    if (options.include_timing) agg["total_seconds"] = report.total_seconds;
    j["aggregate"] = std::move(agg);
    auto hours = nlohmann::ordered_json::array();
    for (const auto& r : report.records) {
      nlohmann::ordered_json h{{"date", format_date(r.date)}, {"hour", r.hour}, {"processed", r.processed}};
      if (r.processed) {
        h["price"] = r.price;
        h["quantity"] = r.quantity;
        h["price_appr"] = r.price_appr;
        h["quantity_appr"] = r.quantity_appr;
        h["abs_error"] = r.abs_error;
        h["above_cap"] = r.above_cap;
        if (options.include_timing) {
          h["build_seconds"] = r.build_seconds;
          h["fit_seconds"] = r.fit_seconds;
          h["intersect_seconds"] = r.intersect_seconds;
        }
      } else {
        h["reason"] = r.skip_reason;
      }
      hours.push_back(std::move(h));
    }
    j["hours"] = std::move(hours);
    return j.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "date,hour,status,price,quantity,price_appr,quantity_appr,abs_error,above_cap,reason";
  if (options.include_timing) out << ",build_seconds,fit_seconds,intersect_seconds";
  out << '\n';
  for (const auto& r : report.records) {
    out << format_date(r.date) << ',' << r.hour << ',';
    if (r.processed) {
      out << "processed," << format_double(r.price) << ',' << format_double(r.quantity) << ','
          << format_double(r.price_appr) << ',' << format_double(r.quantity_appr) << ','
          << format_double(r.abs_error) << ',' << (r.above_cap ? "true" : "false") << ',';
    } else {
      out << "skipped,,,,,,," << csv_field(r.skip_reason);
    }
    if (options.include_timing) {
      out << ',' << format_double(r.build_seconds) << ',' << format_double(r.fit_seconds) << ','
          << format_double(r.intersect_seconds);
    }
    out << '\n';
  }
  out << "\n# aggregate\nkey,value\n";
  out << "hours," << report.records.size() << '\n';
  out << "processed," << report.processed << '\n';
  out << "skipped," << report.skipped << '\n';
  out << "mean_abs_error," << format_double(report.mean_abs_error) << '\n';
  out << "max_abs_error," << format_double(report.max_abs_error) << '\n';
  out << "m_supply," << report.config.m_supply << '\n';
  out << "m_demand," << report.config.m_demand << '\n';
  out << "method," << to_string(report.config.method) << '\n';
  out << "price_cap," << format_double(report.config.price_cap) << '\n';
  if (options.include_timing) out << "total_seconds," << format_double(report.total_seconds) << '\n';
  return out.str();
}

std::string render_report(const CoefficientStats& stats, ReportFormat format, const EmitOptions&) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j{{"side", std::string(to_string(stats.side))}, {"models", stats.models}};
    auto terms = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < stats.terms.size(); ++i) {
      const auto& t = stats.terms[i];
      terms.push_back({{"index", i + 1},
                       {"a", stats_json(t.amplitude)},
                       {"b", stats_json(t.center)},
                       {"c", stats_json(t.shape)}});
    }
    j["terms"] = std::move(terms);
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "side,index,parameter,min,mean,max\n";
  for (std::size_t i = 0; i < stats.terms.size(); ++i) {
    const auto& t = stats.terms[i];
    const std::pair<const char*, const MinMeanMax*> rows[] = {{"a", &t.amplitude}, {"b", &t.center}, {"c", &t.shape}};
    for (const auto& [name, s] : rows) {
      out << to_string(stats.side) << ',' << i + 1 << ',' << name << ',' << format_double(s->min) << ','
          << format_double(s->mean) << ',' << format_double(s->max) << '\n';
    }
  }
  return out.str();
}

std::string render_report(const LayerCountStats& stats, ReportFormat format, const EmitOptions&) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j{{"by_hour", means_json(stats.by_hour)},
                             {"by_weekday", means_json(stats.by_weekday)},
                             {"by_month", means_json(stats.by_month)}};
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "dimension,key,offers_mean,bids_mean,hours\n";
  const std::pair<const char*, const std::map<int, LayerMeans>*> dims[] = {
      {"hour", &stats.by_hour}, {"weekday", &stats.by_weekday}, {"month", &stats.by_month}};
  for (const auto& [name, by_key] : dims) {
    for (const auto& [key, m] : *by_key) {
      out << name << ',' << key << ',' << format_double(m.offers) << ',' << format_double(m.bids) << ',' << m.hours
          << '\n';
    }
  }
  return out.str();
}

void emit_report(const AnyReport& report, ReportFormat format, const std::filesystem::path& path,
                 const EmitOptions& options) {
  const std::string text = std::visit([&](const auto& r) { return render_report(r, format, options); }, report);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(Errc::io_error, "write failed for '" + path.string() + "'");
}

}  // namespace sdfit
