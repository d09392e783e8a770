#include <doctest.h>

#include <cmath>
#include <fstream>

#include "test_util.hpp"
#include "trendcnn/error.hpp"
#include "trendcnn/marketdata.hpp"

using namespace trendcnn;

TEST_SUITE("marketdata") {

TEST_CASE("parses one bar") {
  const auto s = parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-28,10,12,9,11\n", "X");
  REQUIRE(s.size() == 1);
  CHECK(format_date(s[0].date) == "2005-01-28");
  CHECK(s[0].open == 10);
  CHECK(s[0].high == 12);
  CHECK(s[0].low == 9);
  CHECK(s[0].close == 11);
  CHECK(s.scale == PriceScale::Raw);
  CHECK(s.stock_id == "X");
}

TEST_CASE("volume column accepted and dropped, header case-insensitive") {
  const auto s = parse_ohlc_csv("date,open,high,low,close,volume\r\n2005-01-28,10,12,9,11,5000\r\n", "X");
  REQUIRE(s.size() == 1);
  CHECK(s[0].close == 11);
}

TEST_CASE("high below low is an ordering violation with its line number") {
  try {
    parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-28,10,12,9,11\n2005-01-31,10,9,11,10\n", "X");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("OHLC ordering violation") != std::string::npos);
    CHECK(e.line() == 3);
  }
}

TEST_CASE("rejects bad input") {
  CHECK_THROWS_AS(parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-28,10,12,9\n", "X"), ParseError);
  CHECK_THROWS_AS(parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-28,a,12,9,11\n", "X"), ParseError);
  CHECK_THROWS_AS(parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-28,10,12,0,11\n", "X"), ParseError);
  CHECK_THROWS_AS(parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-28,10,12,9,11\n2005-01-28,10,12,9,11\n", "X"),
                  ParseError);
  CHECK_THROWS_AS(parse_ohlc_csv("Date,Open,High,Low,Close\n2005-02-30,10,12,9,11\n", "X"), ParseError);
  CHECK_THROWS_AS(parse_ohlc_csv("Open,Date,High,Low,Close\n", "X"), ParseError);
  CHECK_THROWS_AS(parse_ohlc_csv("", "X"), ParseError);
}

TEST_CASE("non-increasing dates are reported") {
  try {
    parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-31,10,12,9,11\n2005-01-28,10,12,9,11\n", "X");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("non-increasing dates") != std::string::npos);
  }
}

TEST_CASE("parse(serialize(s)) == s on random valid series") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = testutil::random_series(rng, 1 + uniform_index(rng, 60), "R");
    const auto back = parse_ohlc_csv(serialize_ohlc_csv(s), "R");
    CHECK(back == s);
  }
}

TEST_CASE("to_log") {
  auto s = parse_ohlc_csv("Date,Open,High,Low,Close\n2005-01-28,1,2.718281828459045,0.5,1\n", "X");
  const auto l = to_log(s);
  CHECK(l.scale == PriceScale::NaturalLog);
  CHECK(l[0].close == 0.0);
  CHECK(l[0].high == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(to_log(l), ValidationError);
}

TEST_CASE("to_log preserves ordering on random series") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = testutil::random_series(rng, 40);
    const auto l = to_log(s);
    CHECK_NOTHROW(validate(l));
    for (std::size_t i = 1; i < s.size(); ++i) {
      CHECK((s[i].close < s[i - 1].close) == (l[i].close < l[i - 1].close));
      CHECK((s[i].high < s[i].low) == (l[i].high < l[i].low));
    }
  }
}

TEST_CASE("split_by_date partitions") {
  Rng rng(3);
  const auto s = testutil::random_series(rng, 100);
  SUBCASE("threshold before first bar") {
    const auto [train, test] = split_by_date(s, parse_date("2000-01-01"));
    CHECK(train.empty());
    CHECK(test == s);
  }
  SUBCASE("random thresholds") {
    for (int trial = 0; trial < 20; ++trial) {
      const Date thr = s[uniform_index(rng, s.size())].date;
      const auto [train, test] = split_by_date(s, thr);
      CHECK(train.size() + test.size() == s.size());
      REQUIRE(!test.empty());
      if (!train.empty()) CHECK(train.bars.back().date < test.bars.front().date);
      CHECK(test.bars.front().date == thr);
      auto joined = train.bars;
      joined.insert(joined.end(), test.bars.begin(), test.bars.end());
      CHECK(joined == s.bars);
    }
  }
}

TEST_CASE("date split of the full 2005-2017 range follows the calendar span") {
  const Date start = parse_date("2005-01-28");
  const Date end = parse_date("2017-09-13");
  std::vector<Date> days = business_days(start, 3300);
  while (days.back() > end) days.pop_back();
  OhlcSeries s;
  for (auto d : days) s.bars.push_back({d, 1, 1, 1, 1});
  const auto [train, test] = split_by_date(s, parse_date("2014-10-17"));
  const double frac = static_cast<double>(train.size()) / static_cast<double>(s.size());
  using std::chrono::sys_days;
  const double span = static_cast<double>((sys_days{parse_date("2014-10-17")} - sys_days{start}).count()) /
                      static_cast<double>((sys_days{end} - sys_days{start}).count());
  CHECK(std::fabs(frac - span) < 0.005);
  CHECK(frac > 0.7);
  CHECK(frac < 0.8);
}

TEST_CASE("business days skip weekends") {
  const auto d = business_days(parse_date("2024-01-05"), 3);  // Friday
  CHECK(format_date(d[0]) == "2024-01-05");
  CHECK(format_date(d[1]) == "2024-01-08");
  CHECK(format_date(d[2]) == "2024-01-09");
  CHECK(format_date(business_days(parse_date("2024-01-06"), 1)[0]) == "2024-01-08");
}

TEST_CASE("load_ohlc_csv takes the id from the file stem") {
  testutil::TempDir dir;
  const auto path = dir.str("ABC.csv");
  {
    std::ofstream out(path);
    out << "Date,Open,High,Low,Close\n2005-01-28,10,12,9,11\n";
  }
  CHECK(load_ohlc_csv(path).stock_id == "ABC");
  CHECK_THROWS_AS(load_ohlc_csv(dir.str("missing.csv")), Error);
}

}  // TEST_SUITE
