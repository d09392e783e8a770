#include "trendcnn/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trendcnn/error.hpp"

namespace trendcnn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(',', pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_bar(const OhlcBar& bar, std::size_t index, bool positive) {
  auto where = [&] { return "bar " + std::to_string(index) + " (" + format_date(bar.date) + "): "; };
  if (positive && (bar.open <= 0 || bar.high <= 0 || bar.low <= 0 || bar.close <= 0)) {
    throw ValidationError(where() + "nonpositive price");
  }
  if (!(bar.low <= std::min(bar.open, bar.close) && bar.high >= std::max(bar.open, bar.close) &&
        bar.low <= bar.high)) {
    throw ValidationError(where() + "OHLC ordering violation");
  }
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw ParseError("bad date '" + std::string(text) + "'");
  auto num = [&](std::size_t off, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(text.data() + off, text.data() + off + len, out);
    if (ec != std::errc() || p != text.data() + off + len) throw ParseError("bad date '" + std::string(text) + "'");
  };
  num(0, 4, y);
  num(5, 2, m);
  num(8, 2, d);
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw ParseError("bad date '" + std::string(text) + "'");
  return date;
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void validate(const OhlcSeries& series) {
  for (std::size_t i = 0; i < series.bars.size(); ++i) {
    check_bar(series.bars[i], i, series.scale == PriceScale::Raw);
    if (i > 0 && !(series.bars[i - 1].date < series.bars[i].date)) {
      throw ValidationError("bar " + std::to_string(i) + ": non-increasing dates");
    }
  }
}

OhlcSeries parse_ohlc_csv(std::istream& in, std::string stock_id) {
  OhlcSeries series;
  series.stock_id = std::move(stock_id);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError("empty file: missing header");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_commas(line);
  static const char* expected[] = {"date", "open", "high", "low", "close"};
  if (header.size() < 5 || header.size() > 6) throw ParseError("header must be Date,Open,High,Low,Close[,Volume]", 1);
  for (std::size_t i = 0; i < 5; ++i) {
    if (lower(header[i]) != expected[i]) throw ParseError("header must be Date,Open,High,Low,Close[,Volume]", 1);
  }
  if (header.size() == 6 && lower(header[5]) != "volume") throw ParseError("unexpected column '" + std::string(header[5]) + "'", 1);
  const std::size_t columns = header.size();

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_commas(line);
    if (fields.size() != columns) throw ParseError("malformed row: expected " + std::to_string(columns) + " fields", line_no);
    OhlcBar bar;
    bar.date = parse_date(fields[0]);
    double* targets[] = {&bar.open, &bar.high, &bar.low, &bar.close};
    for (std::size_t i = 0; i < 4; ++i) {
      if (!parse_double(fields[i + 1], *targets[i])) {
        throw ParseError("malformed row: bad number '" + std::string(fields[i + 1]) + "'", line_no);
      }
    }
    try {
      check_bar(bar, series.bars.size(), true);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!series.bars.empty() && !(series.bars.back().date < bar.date)) {
      throw ParseError("non-increasing dates", line_no);
    }
    series.bars.push_back(bar);
  }
  return series;
}

OhlcSeries parse_ohlc_csv(std::string_view text, std::string stock_id) {
  std::istringstream in{std::string(text)};
  return parse_ohlc_csv(in, std::move(stock_id));
}

OhlcSeries load_ohlc_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  return parse_ohlc_csv(in, std::filesystem::path(path).stem().string());
}

std::string serialize_ohlc_csv(const OhlcSeries& series) {
  std::string out = "Date,Open,High,Low,Close\n";
  for (const auto& bar : series.bars) {
    out += format_date(bar.date);
    for (double v : {bar.open, bar.high, bar.low, bar.close}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

OhlcSeries to_log(const OhlcSeries& series) {
  if (series.scale == PriceScale::NaturalLog) throw ValidationError(series.stock_id + ": series is already log-scaled");
  OhlcSeries out = series;
  out.scale = PriceScale::NaturalLog;
  for (std::size_t i = 0; i < out.bars.size(); ++i) {
    auto& bar = out.bars[i];
    if (bar.open <= 0 || bar.high <= 0 || bar.low <= 0 || bar.close <= 0) {
      throw ValidationError(series.stock_id + ": bar " + std::to_string(i) + ": nonpositive price");
    }
    bar.open = std::log(bar.open);
    bar.high = std::log(bar.high);
    bar.low = std::log(bar.low);
    bar.close = std::log(bar.close);
  }
  return out;
}

std::size_t first_index_on_or_after(const OhlcSeries& series, Date threshold) {
  auto it = std::lower_bound(series.bars.begin(), series.bars.end(), threshold,
                             [](const OhlcBar& bar, Date d) { return bar.date < d; });
  return static_cast<std::size_t>(it - series.bars.begin());
}

std::pair<OhlcSeries, OhlcSeries> split_by_date(const OhlcSeries& series, Date threshold) {
  const auto cut = first_index_on_or_after(series, threshold);
  OhlcSeries train{series.stock_id, {series.bars.begin(), series.bars.begin() + cut}, series.scale};
  OhlcSeries test{series.stock_id, {series.bars.begin() + cut, series.bars.end()}, series.scale};
  return {std::move(train), std::move(test)};
}

std::vector<Date> business_days(Date start, std::size_t count) {
  using namespace std::chrono;
  std::vector<Date> out;
  out.reserve(count);
  sys_days day{start};
  while (out.size() < count) {
    weekday wd{day};
    if (wd != Saturday && wd != Sunday) out.emplace_back(day);
    day += days{1};
  }
  return out;
}

}  // namespace trendcnn
