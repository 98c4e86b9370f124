// Command line front end: fit, batch, stats, coeffs, synth.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdfit/analytics.hpp"
#include "sdfit/config.hpp"
#include "sdfit/error.hpp"
#include "sdfit/text.hpp"

namespace fs = std::filesystem;
using namespace sdfit;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

// Thrown for bad flag combinations that CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::string supply_file;
  std::string demand_file;
  std::optional<int> m_supply;
  std::optional<int> m_demand;
  std::optional<std::string> method;
  std::optional<double> price_cap;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<int> hours;
  std::string format = "csv";
  std::string out;
  std::string models_dir;
  std::string svg_dir;
  std::string date;
  std::optional<int> hour;
  std::string side = "supply";
  bool skip_bad = false;
  bool timing = false;
};

BatchConfig resolve_config(const Flags& f) {
  BatchConfig c = f.config.empty() ? BatchConfig{} : load_config(f.config);
  if (f.m_supply) c.fit.m_supply = *f.m_supply;
  if (f.m_demand) c.fit.m_demand = *f.m_demand;
  if (f.method) c.fit.method = method_from_string(*f.method);
  if (f.price_cap) c.fit.price_cap = *f.price_cap;
  if (f.workers) c.workers = *f.workers;
  if (f.seed) c.generator.seed = *f.seed;
  if (f.hours) c.generator.hours = *f.hours;
  validate(c.fit);
  if (c.workers < 1) throw Error(Errc::invalid_argument, "workers must be >= 1");
  if (c.generator.hours < 1) throw Error(Errc::invalid_argument, "hours must be >= 1");
  return c;
}

// Files when both are given, otherwise the synthetic corpus described by the
// generator settings.
Corpus input_corpus(const Flags& f, const BatchConfig& c) {
  if (f.supply_file.empty() != f.demand_file.empty()) {
    throw UsageError("--supply-file and --demand-file go together");
  }
  if (f.supply_file.empty()) return generate_synthetic_corpus(c.generator);
  ParseOptions options;
  options.skip_bad = f.skip_bad;
  return load_corpus(f.supply_file, f.demand_file, options);
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw Error(Errc::io_error, "cannot write '" + out + "'");
  file << text;
  if (!file) throw Error(Errc::io_error, "failed writing '" + out + "'");
}

std::string model_file_stem(const ErfSumModel& m) {
  char hour[8];
  std::snprintf(hour, sizeof hour, "h%02d", m.provenance->hour);
  return m.provenance->date + "_" + hour + "_" + std::string(to_string(m.side));
}

void write_model(const ErfSumModel& m, const fs::path& dir) {
  write_text(to_json(m).dump(2) + "\n", (dir / (model_file_stem(m) + ".json")).string());
}

int cmd_fit(const Flags& f) {
  const BatchConfig c = resolve_config(f);
  if (f.supply_file.empty() || f.demand_file.empty()) throw UsageError("fit needs --supply-file and --demand-file");
  const Corpus corpus = input_corpus(f, c);
  const auto it = std::find_if(corpus.hours.begin(), corpus.hours.end(), [&](const HourlyAuction& h) {
    return (f.date.empty() || h.date == parse_date(f.date)) && (!f.hour || h.hour == *f.hour);
  });
  if (it == corpus.hours.end()) throw Error(Errc::invalid_input, "no auction matches the requested date/hour");
  Corpus one;
  one.hours.push_back(*it);
  const FitReport report = run_batch(one, c.fit, {1, true});
  const HourRecord& r = report.records.front();

  nlohmann::ordered_json j;
  j["date"] = format_date(r.date);
  j["hour"] = r.hour;
  j["config"] = to_json(c.fit);
  j["price"] = r.price;
  j["quantity"] = r.quantity;
  j["price_appr"] = r.price_appr;
  j["quantity_appr"] = r.quantity_appr;
  j["abs_error"] = r.abs_error;
  j["above_cap"] = r.above_cap;
  j["supply"] = to_json(*r.supply_model);
  j["demand"] = to_json(*r.demand_model);
  write_text(j.dump(2) + "\n", f.out);

  if (!f.svg_dir.empty()) {
    fs::create_directories(f.svg_dir);
    const auto supply = truncate_curve(build_supply_curve(it->offers), c.fit.price_cap);
    const auto demand = truncate_curve(build_demand_curve(it->bids), c.fit.price_cap);
    render_curve_svg(supply, *r.supply_model, fs::path(f.svg_dir) / (model_file_stem(*r.supply_model) + ".svg"));
    render_curve_svg(demand, *r.demand_model, fs::path(f.svg_dir) / (model_file_stem(*r.demand_model) + ".svg"));
  }
  return 0;
}

int cmd_batch(const Flags& f) {
  const BatchConfig c = resolve_config(f);
  const ReportFormat format = format_from_string(f.format);
  const Corpus corpus = input_corpus(f, c);
  const bool keep = !f.models_dir.empty();
  const FitReport report = run_batch(corpus, c.fit, {c.workers, keep});
  if (keep) {
    fs::create_directories(f.models_dir);
    for (const auto& r : report.records) {
      if (!r.processed) continue;
      write_model(*r.supply_model, f.models_dir);
      write_model(*r.demand_model, f.models_dir);
    }
  }
  write_text(render_report(report, format, {f.timing}), f.out);
  std::cerr << "processed " << report.processed << " of " << corpus.hours.size() << " hours, mean |P - P_appr| "
            << format_double(report.mean_abs_error) << "\n";
  return 0;
}

int cmd_stats(const Flags& f) {
  const BatchConfig c = resolve_config(f);
  const ReportFormat format = format_from_string(f.format);
  write_text(render_report(layer_stats(input_corpus(f, c)), format), f.out);
  return 0;
}

int cmd_coeffs(const Flags& f) {
  const ReportFormat format = format_from_string(f.format);
  const Side side = side_from_string(f.side);
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(f.models_dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw Error(Errc::io_error, "cannot list '" + f.models_dir + "': " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<ErfSumModel> models;
  for (const auto& path : files) {
    std::ifstream in(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, path.string() + ": " + e.what());
    }
    auto m = model_from_json(j);
    if (m.side == side) models.push_back(std::move(m));
  }
  if (models.empty()) throw Error(Errc::empty_corpus, "no " + f.side + " models in '" + f.models_dir + "'");
  write_text(render_report(coefficient_stats(models), format), f.out);
  return 0;
}

int cmd_synth(const Flags& f) {
  const BatchConfig c = resolve_config(f);
  const Corpus corpus = generate_synthetic_corpus(c.generator);
  const fs::path dir = f.out.empty() ? fs::path(".") : fs::path(f.out);
  fs::create_directories(dir);
  const fs::path offers = f.supply_file.empty() ? dir / "offers.csv" : fs::path(f.supply_file);
  const fs::path bids = f.demand_file.empty() ? dir / "bids.csv" : fs::path(f.demand_file);
  write_auction_csv(corpus, Side::supply, offers);
  write_auction_csv(corpus, Side::demand, bids);
  std::cerr << "wrote " << corpus.hours.size() << " hours to " << offers.string() << " and " << bids.string()
            << "\n";
  return 0;
}

void add_input(CLI::App* app, Flags& f) {
  app->add_option("--supply-file", f.supply_file, "Offer (supply) layers CSV");
  app->add_option("--demand-file", f.demand_file, "Bid (demand) layers CSV");
  app->add_flag("--skip-bad", f.skip_bad, "Skip malformed rows instead of failing");
}

void add_fit(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON configuration file");
  app->add_option("--m-supply", f.m_supply, "Erf terms for the supply curve");
  app->add_option("--m-demand", f.m_demand, "Erf terms for the demand curve");
  app->add_option("--method", f.method, "Segmentation method")->check(CLI::IsMember({"uniform", "plateau"}));
  app->add_option("--price-cap", f.price_cap, "Fitting price cap in EUR (default 400)");
}

void add_synthetic(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.seed, "Generator seed");
  app->add_option("--hours", f.hours, "Number of synthetic hours");
}

void add_format(CLI::App* app, Flags& f) {
  app->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Erf-sum compression of day-ahead auction curves"};
  app.require_subcommand(1);
  Flags f;

  auto* fit = app.add_subcommand("fit", "Fit one hour and write both models as JSON");
  add_input(fit, f);
  add_fit(fit, f);
  fit->add_option("--date", f.date, "Auction date (yyyy-mm-dd or dd-mm-yyyy); default first in file");
  fit->add_option("--hour", f.hour, "Auction hour 1-24")->check(CLI::Range(1, 24));
  fit->add_option("--svg", f.svg_dir, "Directory for step/fit overlay plots");
  fit->add_option("--out", f.out, "Output file (default stdout)");

  auto* batch = app.add_subcommand("batch", "Fit every hour of a corpus and report the price error");
  add_input(batch, f);
  add_fit(batch, f);
  add_synthetic(batch, f);
  add_format(batch, f);
  batch->add_option("--workers", f.workers, "Worker threads");
  batch->add_option("--models-dir", f.models_dir, "Also write every fitted model here");
  batch->add_flag("--timing", f.timing, "Include wall-clock columns (makes output nondeterministic)");
  batch->add_option("--out", f.out, "Report file (default stdout)");

  auto* stats = app.add_subcommand("stats", "Mean layer counts by hour, weekday and month");
  add_input(stats, f);
  add_synthetic(stats, f);
  add_format(stats, f);
  stats->add_option("--config", f.config, "JSON configuration file");
  stats->add_option("--out", f.out, "Report file (default stdout)");

  auto* coeffs = app.add_subcommand("coeffs", "Min/mean/max of model coefficients per term index");
  coeffs->add_option("--models-dir", f.models_dir, "Directory of model JSON files")->required();
  coeffs->add_option("--side", f.side, "Which models to summarize")->check(CLI::IsMember({"supply", "demand"}));
  add_format(coeffs, f);
  coeffs->add_option("--out", f.out, "Report file (default stdout)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus as offer and bid CSV files");
  add_synthetic(synth, f);
  synth->add_option("--config", f.config, "JSON configuration file");
  synth->add_option("--out", f.out, "Output directory (default .)");
  synth->add_option("--supply-file", f.supply_file, "Offer file path (default <out>/offers.csv)");
  synth->add_option("--demand-file", f.demand_file, "Bid file path (default <out>/bids.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*fit) return cmd_fit(f);
    if (*batch) return cmd_batch(f);
    if (*stats) return cmd_stats(f);
    if (*coeffs) return cmd_coeffs(f);
    return cmd_synth(f);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::invalid_argument ? kUsage : kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}
