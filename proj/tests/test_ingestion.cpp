#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sdfit/error.hpp"
#include "sdfit/ingestion.hpp"
#include "sdfit/market_curves.hpp"

#ifndef SDFIT_TEST_DATA
#define SDFIT_TEST_DATA "tests/data"
#endif

namespace sdfit {
namespace {

using namespace std::chrono;

const std::filesystem::path kData{SDFIT_TEST_DATA};

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no sdfit::Error thrown";
  return Errc::io_error;
}

CorpusFragment parse_text(const std::string& text, Side side = Side::supply, ParseOptions options = {}) {
  std::istringstream in(text);
  return parse_auction_csv(in, side, options);
}

TEST(ParseDate, BothLayouts) {
  EXPECT_EQ(parse_date("01-01-2017"), Date{year{2017} / January / 1});
  EXPECT_EQ(parse_date("2017-12-31"), Date{year{2017} / December / 31});
  EXPECT_EQ(format_date(parse_date("31-12-2017")), "2017-12-31");
  EXPECT_THROW(parse_date("2017-02-30"), Error);
  EXPECT_THROW(parse_date("1/1/2017"), Error);
}

TEST(ParseAuctionCsv, SampleRows) {
  const auto f = parse_auction_csv(kData / "sample_offers.csv", Side::supply);
  EXPECT_EQ(f.rows, 11u);
  EXPECT_EQ(f.accepted, 11u);
  const auto& first = f.layers.at({Date{year{2017} / January / 1}, 1});
  ASSERT_EQ(first.size(), 6u);
  EXPECT_EQ(first.front(), (BidLayer{13392.7, 0, Side::supply}));
  const auto& last = f.layers.at({Date{year{2017} / December / 31}, 24});
  EXPECT_EQ(last.back(), (BidLayer{60000, 3000, Side::supply}));

  const auto curve = build_supply_curve(first);
  EXPECT_EQ(curve.points[0].quantity, 13392.7);
  EXPECT_EQ(curve.points[1].quantity, 13417.7);
  EXPECT_EQ(curve.points[2].quantity, 13531.5);
}

TEST(ParseAuctionCsv, DelimiterAndCrLf) {
  const auto f = parse_text("date;hour;volume;price\r\n2017-03-05;7;12.5;40\r\n", Side::demand, {';', false});
  ASSERT_EQ(f.accepted, 1u);
  EXPECT_EQ(f.layers.begin()->second.front(), (BidLayer{12.5, 40, Side::demand}));
}

TEST(ParseAuctionCsv, StrictFailuresCarryLineNumbers) {
  const std::string header = "date,hour,volume,price\n";
  const auto message = [&](const std::string& body) {
    try {
      parse_text(header + body);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::parse_error);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("01-01-2017,1,10,5\n01-01-2017,25,10,5\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("01-01-2017,1,abc,5\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("01-01-2017,1,10,3000.5\n").find("price"), std::string::npos);
  EXPECT_NE(message("01-01-2017,1,10\n").find("4 fields"), std::string::npos);
  EXPECT_NE(message("01-13-2017,1,10,5\n").find("date"), std::string::npos);
  EXPECT_NE(message("01-01-2017,1,-2,5\n").find("volume"), std::string::npos);
  EXPECT_EQ(code_of([] { parse_text("day,hour,volume,price\n01-01-2017,1,1,1\n"); }), Errc::parse_error);
}

TEST(ParseAuctionCsv, SkipBadAccountsForEveryRow) {
  const auto f = parse_text(
      "date,hour,volume,price\n01-01-2017,1,10,5\n01-01-2017,0,10,5\nbad\n01-01-2017,2,1e400,5\n02-01-2017,2,3,4\n",
      Side::supply, {',', true});
  EXPECT_EQ(f.rows, 5u);
  EXPECT_EQ(f.accepted, 2u);
  ASSERT_EQ(f.bad_rows.size(), 3u);
  EXPECT_EQ(f.rows, f.accepted + f.bad_rows.size());
  EXPECT_EQ(f.bad_rows[0].line, 3u);
  EXPECT_EQ(f.bad_rows[1].line, 4u);
  EXPECT_EQ(f.bad_rows[2].line, 5u);
}

TEST(ParseAuctionCsv, EmptyAndMissing) {
  EXPECT_EQ(code_of([] { parse_text(""); }), Errc::empty_corpus);
  EXPECT_EQ(code_of([] { parse_text("date,hour,volume,price\n"); }), Errc::empty_corpus);
  EXPECT_EQ(code_of([] { parse_auction_csv(kData / "does_not_exist.csv", Side::supply); }), Errc::io_error);
}

TEST(LoadCorpus, MergesSidesByHour) {
  const auto corpus = load_corpus(kData / "sample_offers.csv", kData / "sample_bids.csv");
  ASSERT_EQ(corpus.hours.size(), 2u);
  EXPECT_EQ(corpus.hours[0].hour, 1);
  EXPECT_EQ(corpus.hours[0].offers.size(), 6u);
  EXPECT_EQ(corpus.hours[0].bids.size(), 3u);
  EXPECT_EQ(corpus.hours[1].date, Date{year{2017} / December / 31});
}

TEST(SyntheticCorpus, CountsAndDeterminism) {
  GeneratorConfig g;
  g.hours = 1;
  const auto one = generate_synthetic_corpus(g);
  ASSERT_EQ(one.hours.size(), 1u);
  EXPECT_EQ(one.hours[0].offers.size(), 324u);
  EXPECT_EQ(one.hours[0].bids.size(), 65u);

  g.hours = 48;
  std::ostringstream a, b;
  const auto c1 = generate_synthetic_corpus(g);
  const auto c2 = generate_synthetic_corpus(g);
  write_auction_csv(c1, Side::supply, a);
  write_auction_csv(c2, Side::supply, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(c1, c2);
  g.seed = 2;
  EXPECT_NE(generate_synthetic_corpus(g), c1);

  for (const auto& h : c1.hours) {
    for (const auto& l : h.offers) EXPECT_NO_THROW(validate_layer(l));
    for (const auto& l : h.bids) EXPECT_NO_THROW(validate_layer(l));
  }
  EXPECT_THROW(generate_synthetic_corpus(GeneratorConfig{.hours = 0}), Error);
}

TEST(SyntheticCorpus, ClearsInAlmostEveryHour) {
  GeneratorConfig g;
  g.hours = 500;
  const auto corpus = generate_synthetic_corpus(g);
  int cleared = 0;
  for (const auto& h : corpus.hours) {
    try {
      const auto e = clear_market(build_supply_curve(h.offers), build_demand_curve(h.bids));
      if (e.quantity > 0.0) ++cleared;
    } catch (const Error&) {
    }
  }
  EXPECT_GE(cleared, 495);
}

TEST(SyntheticCorpus, SerializeParseRoundTrip) {
  GeneratorConfig g;
  g.hours = 30;
  g.seed = 77;
  const auto corpus = generate_synthetic_corpus(g);
  std::stringstream offers, bids;
  write_auction_csv(corpus, Side::supply, offers);
  write_auction_csv(corpus, Side::demand, bids);
  auto back = assemble_corpus(parse_auction_csv(offers, Side::supply), parse_auction_csv(bids, Side::demand),
                              corpus.provenance);
  EXPECT_EQ(back, corpus);
}

}  // namespace
}  // namespace sdfit
