#include "trendcnn/ctf.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "trendcnn/error.hpp"

namespace trendcnn {

void append_number(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

void CtfWriter::check_dims(std::size_t labels, std::size_t features) {
  if (count_ == 0) {
    label_dim_ = labels;
    feature_dim_ = features;
    return;
  }
  if (labels != label_dim_ || features != feature_dim_) {
    throw ValidationError("heterogeneous CTF record dimensions: expected " + std::to_string(label_dim_) + "/" +
                          std::to_string(feature_dim_) + ", got " + std::to_string(labels) + "/" +
                          std::to_string(features));
  }
}

void CtfWriter::emit(const std::string& line) {
  sink_.write(line.data(), static_cast<std::streamsize>(line.size()));
  if (!sink_) throw Error("io", "CTF sink write failed");
  ++count_;
}

void CtfWriter::write(std::span<const double> labels, std::span<const double> features) {
  check_dims(labels.size(), features.size());
  line_.assign("|labels");
  for (double v : labels) {
    line_ += ' ';
    append_number(line_, v);
  }
  line_ += "|features";
  for (double v : features) {
    line_ += ' ';
    append_number(line_, v);
  }
  line_ += '\n';
  emit(line_);
}

void CtfWriter::write(std::span<const double> labels, std::span<const std::uint8_t> features, double scale) {
  check_dims(labels.size(), features.size());
  line_.assign("|labels");
  for (double v : labels) {
    line_ += ' ';
    append_number(line_, v);
  }
  line_ += "|features";
  for (auto v : features) {
    line_ += ' ';
    if (scale == 1.0) {
      char buf[4];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<unsigned>(v));
      line_.append(buf, ptr);
    } else {
      append_number(line_, v * scale);
    }
  }
  line_ += '\n';
  emit(line_);
}

namespace {

// Parses space-separated numbers from [p, end) until '|' or end.
const char* parse_values(const char* p, const char* end, std::vector<double>& out, std::size_t line_no) {
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end || *p == '|') break;
    double v;
    const char* token = p;
    if (*p == '+') ++p;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '|')) {
      const char* stop = token;
      while (stop < end && *stop != ' ' && *stop != '|') ++stop;
      throw ParseError("non-numeric token '" + std::string(token, stop) + "'", line_no);
    }
    out.push_back(v);
    p = next;
  }
  return p;
}

bool take(const char*& p, const char* end, std::string_view word) {
  if (static_cast<std::size_t>(end - p) < word.size() || std::string_view(p, word.size()) != word) return false;
  p += word.size();
  return true;
}

}  // namespace

bool CtfReader::next(CtfRecord& record) {
  while (std::getline(source_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.find_first_not_of(" \t") == std::string::npos) continue;

    const char* p = line_.data();
    const char* end = p + line_.size();
    // Fig.-style `||labels` is tolerated alongside the canonical `|labels`.
    if (!take(p, end, "|")) throw ParseError("malformed pipe structure: expected '|labels'", line_no_);
    take(p, end, "|");
    if (!take(p, end, "labels")) throw ParseError("malformed pipe structure: expected '|labels'", line_no_);

    record.labels.clear();
    record.features.clear();
    p = parse_values(p, end, record.labels, line_no_);
    if (!take(p, end, "|features")) throw ParseError("malformed pipe structure: missing '|features'", line_no_);
    p = parse_values(p, end, record.features, line_no_);
    if (p != end) throw ParseError("malformed pipe structure: unexpected '|'", line_no_);

    if (record.labels.size() != label_dim_) {
      throw ParseError("dimension mismatch: " + std::to_string(record.labels.size()) + " labels, expected " +
                           std::to_string(label_dim_),
                       line_no_);
    }
    if (record.features.size() != feature_dim_) {
      throw ParseError("dimension mismatch: " + std::to_string(record.features.size()) + " features, expected " +
                           std::to_string(feature_dim_),
                       line_no_);
    }
    return true;
  }
  return false;
}

std::size_t write_ctf(std::span<const CtfRecord> records, std::ostream& sink) {
  CtfWriter writer(sink);
  for (const auto& r : records) writer.write(r);
  return writer.count();
}

std::vector<CtfRecord> parse_ctf(std::istream& source, std::size_t label_dim, std::size_t feature_dim) {
  CtfReader reader(source, label_dim, feature_dim);
  std::vector<CtfRecord> out;
  CtfRecord r;
  while (reader.next(r)) out.push_back(r);
  return out;
}

}  // namespace trendcnn
