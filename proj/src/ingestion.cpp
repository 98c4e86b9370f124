#include "sdfit/ingestion.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "sdfit/error.hpp"
#include "sdfit/text.hpp"

namespace sdfit {

namespace {

std::optional<Date> try_parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10) return std::nullopt;
  std::optional<int> y, m, d;
  if (text[2] == '-' && text[5] == '-') {
    d = parse_int(text.substr(0, 2));
    m = parse_int(text.substr(3, 2));
    y = parse_int(text.substr(6, 4));
  } else if (text[4] == '-' && text[7] == '-') {
    y = parse_int(text.substr(0, 4));
    m = parse_int(text.substr(5, 2));
    d = parse_int(text.substr(8, 2));
  }
  if (!y || !m || !d || *m < 1 || *d < 1) return std::nullopt;
  const Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

constexpr std::array<std::string_view, 4> kHeader{"date", "hour", "volume", "price"};

}  // namespace

Date parse_date(std::string_view text) {
  auto date = try_parse_date(text);
  if (!date) throw Error(Errc::parse_error, "invalid date '" + std::string(text) + "'");
  return *date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

CorpusFragment parse_auction_csv(std::istream& in, Side side, const ParseOptions& options) {
  CorpusFragment fragment;
  fragment.side = side;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, options.delimiter);
    if (!have_header) {
      if (fields.size() != kHeader.size() || !std::equal(fields.begin(), fields.end(), kHeader.begin())) {
        throw Error(Errc::parse_error, "line " + std::to_string(line_no) +
                                           ": header must be 'date,hour,volume,price' (delimiter '" +
                                           std::string(1, options.delimiter) + "')");
      }
      have_header = true;
      continue;
    }
    ++fragment.rows;
    std::string reason;
    std::optional<Date> date;
    std::optional<int> hour;
    std::optional<double> volume, price;
    if (fields.size() != kHeader.size()) {
      reason = "expected 4 fields, found " + std::to_string(fields.size());
    } else if (!(date = try_parse_date(fields[0]))) {
      reason = "invalid date '" + std::string(fields[0]) + "'";
    } else if (!(hour = parse_int(fields[1])) || *hour < 1 || *hour > 24) {
      reason = "hour must be an integer in 1..24, got '" + std::string(fields[1]) + "'";
    } else if (!(volume = parse_double(fields[2])) || *volume < 0.0) {
      reason = "volume must be a number >= 0, got '" + std::string(fields[2]) + "'";
    } else if (!(price = parse_double(fields[3])) || *price < 0.0 || *price > kMarketMaxPrice) {
      reason = "price must be a number in [0, 3000], got '" + std::string(fields[3]) + "'";
    }
    if (!reason.empty()) {
      if (!options.skip_bad) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": " + reason);
      fragment.bad_rows.push_back({line_no, std::move(reason)});
      continue;
    }
    fragment.layers[{*date, *hour}].push_back({*volume, *price, side});
    ++fragment.accepted;
  }
  if (fragment.rows == 0) throw Error(Errc::empty_corpus, "no data rows");
  return fragment;
}

CorpusFragment parse_auction_csv(const std::filesystem::path& path, Side side, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path.string() + "'");
  try {
    return parse_auction_csv(in, side, options);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Corpus assemble_corpus(const CorpusFragment& offers, const CorpusFragment& bids, std::string provenance) {
  std::map<AuctionKey, HourlyAuction> merged;
  const auto add = [&merged](const CorpusFragment& fragment, bool is_offer) {
    for (const auto& [key, layers] : fragment.layers) {
      auto& hour = merged[key];
      hour.date = key.first;
      hour.hour = key.second;
      auto& target = is_offer ? hour.offers : hour.bids;
      target.insert(target.end(), layers.begin(), layers.end());
    }
  };
  add(offers, true);
  add(bids, false);
  Corpus corpus;
  corpus.provenance = std::move(provenance);
  for (auto& [key, hour] : merged) corpus.hours.push_back(std::move(hour));
  if (corpus.hours.empty()) throw Error(Errc::empty_corpus, "no hours found");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& offers_path, const std::filesystem::path& bids_path,
                   const ParseOptions& options) {
  const auto offers = parse_auction_csv(offers_path, Side::supply, options);
  const auto bids = parse_auction_csv(bids_path, Side::demand, options);
  return assemble_corpus(offers, bids, "files: " + offers_path.string() + " + " + bids_path.string());
}

void write_auction_csv(const Corpus& corpus, Side side, std::ostream& out) {
  out << "date,hour,volume,price\n";
  for (const auto& hour : corpus.hours) {
    const auto date = format_date(hour.date);
    for (const auto& layer : side == Side::supply ? hour.offers : hour.bids) {
      out << date << ',' << hour.hour << ',' << format_double(layer.volume) << ',' << format_double(layer.price)
          << '\n';
    }
  }
}

void write_auction_csv(const Corpus& corpus, Side side, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
  write_auction_csv(corpus, side, out);
  if (!out) throw Error(Errc::io_error, "write failed for '" + path.string() + "'");
}

std::vector<TechnologyBand> GeneratorConfig::default_bands() {
  return {
      {"renewables", 0.1, 15.0, 0.15},
      {"hydro", 20.0, 45.0, 0.20},
      {"gas", 45.0, 75.0, 0.35},
      {"coal", 75.0, 110.0, 0.15},
      {"oil", 110.0, 350.0, 0.15},
  };
}

namespace {

// mt19937_64's output sequence is fixed by the standard; the transforms
// below avoid the implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Dividing by the inverse step keeps results at the nearest double of the
// intended decimal (13392.7, not 13392.700000000001).
double round_to(double value, double step) {
  const double per_unit = std::round(1.0 / step);
  return std::round(value * per_unit) / per_unit;
}

}  // namespace

Corpus generate_synthetic_corpus(const GeneratorConfig& config) {
  if (config.hours < 1 || config.supply_layers < 1 || config.demand_layers < 1) {
    throw Error(Errc::invalid_argument, "hours and layer counts must be >= 1");
  }
  double share_total = 0.0;
  for (const auto& band : config.bands) {
    if (!(band.price_lo > 0.0) || !(band.price_hi >= band.price_lo) || band.price_hi > kMarketMaxPrice ||
        !(band.layer_share >= 0.0)) {
      throw Error(Errc::invalid_argument, "invalid technology band '" + band.name + "'");
    }
    share_total += band.layer_share;
  }
  if (config.bands.empty() || !(share_total > 0.0)) {
    throw Error(Errc::invalid_argument, "generator needs at least one band with positive share");
  }

  Rng rng(config.seed);
  const std::chrono::sys_days start{parse_date(config.start_date)};
  Corpus corpus;
  corpus.provenance = "synthetic: seed=" + std::to_string(config.seed) + " hours=" + std::to_string(config.hours) +
                      " supply_layers=" + std::to_string(config.supply_layers) +
                      " demand_layers=" + std::to_string(config.demand_layers);
  corpus.hours.reserve(static_cast<std::size_t>(config.hours));

  for (int t = 0; t < config.hours; ++t) {
    HourlyAuction hour;
    const std::chrono::sys_days day = start + std::chrono::days{t / 24};
    hour.date = Date{day};
    hour.hour = t % 24 + 1;
    const unsigned weekday = std::chrono::weekday{day}.c_encoding();  // 0 = Sunday
    const bool weekend = weekday == 0 || weekday == 6;

    // Supply: one must-run block at 0 EUR, clustered technology layers and,
    // when room allows, two scarcity layers above any realistic cap.
    const int scarcity = config.supply_layers >= 3 ? 2 : 0;
    const int priced = config.supply_layers - 1 - scarcity;
    hour.offers.push_back(
        {round_to(config.must_run_volume * rng.uniform(0.85, 1.15), 0.1), 0.0, Side::supply});
    int assigned = 0;
    for (std::size_t b = 0; b < config.bands.size(); ++b) {
      const auto& band = config.bands[b];
      const int count = b + 1 == config.bands.size()
                            ? priced - assigned
                            : std::min(priced - assigned,
                                       static_cast<int>(std::lround(priced * band.layer_share / share_total)));
      for (int k = 0; k < count; ++k) {
        // Mean of two uniforms: prices cluster towards the band centre.
        const double u = 0.5 * (rng.uniform() + rng.uniform());
        const double price = std::max(0.01, round_to(band.price_lo + (band.price_hi - band.price_lo) * u, 0.01));
        const double volume =
            std::clamp(round_to(std::exp(std::log(55.0) + 0.9 * rng.normal()), 0.1), 0.1, 1500.0);
        hour.offers.push_back({volume, price, Side::supply});
      }
      assigned += count;
    }
    if (scarcity == 2) {
      hour.offers.push_back({round_to(rng.uniform(50.0, 500.0), 0.1), round_to(rng.uniform(500.0, 900.0), 0.1),
                             Side::supply});
      hour.offers.push_back({60000.0, kMarketMaxPrice, Side::supply});
    }

    // Demand: price-taking base load (bid at 0 EUR) following a daily
    // cycle, plus an elastic tail.
    const double phase = 2.0 * std::numbers::pi * (hour.hour - 4.0) / 24.0;
    double base = config.base_load - config.daily_swing * std::cos(phase);
    if (weekend) base *= 0.88;
    base += 400.0 * rng.normal();
    hour.bids.push_back({round_to(std::max(base, 1000.0), 0.1), 0.0, Side::demand});
    for (int k = 1; k < config.demand_layers; ++k) {
      const double price = rng.uniform() < 0.6 ? rng.uniform(20.0, 150.0) : rng.uniform(150.0, 350.0);
      hour.bids.push_back(
          {round_to(rng.uniform(20.0, 250.0), 0.1), std::max(0.01, round_to(price, 0.01)), Side::demand});
    }
    corpus.hours.push_back(std::move(hour));
  }
  return corpus;
}

}  // namespace sdfit
