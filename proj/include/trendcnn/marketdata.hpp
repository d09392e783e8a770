#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trendcnn {

using Date = std::chrono::year_month_day;

// Parses `YYYY-MM-DD`; throws ParseError on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date date);

struct OhlcBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;

  bool operator==(const OhlcBar&) const = default;
};

enum class PriceScale { Raw, NaturalLog };

// Daily bars of one stock. Bars are addressed by position ("business day"
// index); missing calendar days are not interpolated.
struct OhlcSeries {
  std::string stock_id;
  std::vector<OhlcBar> bars;
  PriceScale scale = PriceScale::Raw;

  std::size_t size() const noexcept { return bars.size(); }
  bool empty() const noexcept { return bars.empty(); }
  const OhlcBar& operator[](std::size_t i) const { return bars[i]; }

  bool operator==(const OhlcSeries&) const = default;
};

// Throws ValidationError describing the first violated invariant.
void validate(const OhlcSeries& series);

// Header `Date,Open,High,Low,Close[,Volume]`. Volume is accepted and dropped.
OhlcSeries parse_ohlc_csv(std::istream& in, std::string stock_id);
OhlcSeries parse_ohlc_csv(std::string_view text, std::string stock_id);
OhlcSeries load_ohlc_csv(const std::string& path);

// Shortest round-trip decimal formatting, so parse(serialize(s)) == s.
std::string serialize_ohlc_csv(const OhlcSeries& series);

OhlcSeries to_log(const OhlcSeries& series);

std::pair<OhlcSeries, OhlcSeries> split_by_date(const OhlcSeries& series, Date threshold);

// Index of the first bar with date >= threshold (size() when none).
std::size_t first_index_on_or_after(const OhlcSeries& series, Date threshold);

// Monday..Friday dates starting at `start` (rolled forward off a weekend).
std::vector<Date> business_days(Date start, std::size_t count);

// Shortest round-trip decimal text for a double.
std::string format_number(double value);

}  // namespace trendcnn
