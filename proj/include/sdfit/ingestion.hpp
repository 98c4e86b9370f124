#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdfit/market_curves.hpp"

namespace sdfit {

using Date = std::chrono::year_month_day;

/// Accepts "dd-mm-yyyy" and ISO "yyyy-mm-dd".
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

struct HourlyAuction {
  Date date;
  int hour = 1;  // 1..24
  std::vector<BidLayer> offers;
  std::vector<BidLayer> bids;

  bool fittable() const { return !offers.empty() && !bids.empty(); }

  friend bool operator==(const HourlyAuction&, const HourlyAuction&) = default;
};

/// Hours ordered by (date, hour); each pair occurs at most once.
struct Corpus {
  std::vector<HourlyAuction> hours;
  std::string provenance;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

using AuctionKey = std::pair<Date, int>;

struct ParseOptions {
  char delimiter = ',';
  bool skip_bad = false;
};

struct BadRow {
  std::size_t line = 0;
  std::string reason;
};

/// Layers of one side grouped by (date, hour), as read from one file.
struct CorpusFragment {
  Side side = Side::supply;
  std::map<AuctionKey, std::vector<BidLayer>> layers;
  std::size_t rows = 0;
  std::size_t accepted = 0;
  std::vector<BadRow> bad_rows;
};

/// Header must read exactly `date,hour,volume,price` (fields are trimmed,
/// the delimiter is configurable). Any bad row fails the whole file with its
/// line number unless `skip_bad` is set, in which case it is reported in
/// `bad_rows`.
CorpusFragment parse_auction_csv(std::istream& in, Side side, const ParseOptions& options = {});
CorpusFragment parse_auction_csv(const std::filesystem::path& path, Side side, const ParseOptions& options = {});

Corpus assemble_corpus(const CorpusFragment& offers, const CorpusFragment& bids, std::string provenance);

Corpus load_corpus(const std::filesystem::path& offers_path, const std::filesystem::path& bids_path,
                   const ParseOptions& options = {});

/// Canonical form: ISO dates, shortest round-trip decimals, rows in corpus
/// order.
void write_auction_csv(const Corpus& corpus, Side side, std::ostream& out);
void write_auction_csv(const Corpus& corpus, Side side, const std::filesystem::path& path);

struct TechnologyBand {
  std::string name;
  double price_lo = 0.0;
  double price_hi = 0.0;
  double layer_share = 0.0;  // fraction of the priced supply layers
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  int hours = 24;
  int supply_layers = 324;
  int demand_layers = 65;
  std::string start_date = "2017-01-01";
  /// Default profile: renewables, hydro, gas, coal, oil.
  std::vector<TechnologyBand> bands = default_bands();
  double must_run_volume = 13000.0;    // MW offered at 0 EUR
  double base_load = 24000.0;          // MW bid at 0 EUR (price takers) around midday
  double daily_swing = 4000.0;         // MW peak-to-mean variation of the base load

  static std::vector<TechnologyBand> default_bands();
};

/// Deterministic for a given configuration, independent of the standard
/// library's distribution implementations.
Corpus generate_synthetic_corpus(const GeneratorConfig& config);

}  // namespace sdfit
