#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace trendcnn {

// One CTF observation: `|labels v1 ... vk|features f1 ... fn`.
struct CtfRecord {
  std::vector<double> labels;
  std::vector<double> features;

  bool operator==(const CtfRecord&) const = default;
};

// Streams records to a sink, one line each. Dimensions are fixed by the
// first record written.
class CtfWriter {
 public:
  explicit CtfWriter(std::ostream& sink) : sink_(sink) {}

  void write(std::span<const double> labels, std::span<const double> features);
  // Pixel features, each written as `value * scale`.
  void write(std::span<const double> labels, std::span<const std::uint8_t> features, double scale = 1.0);
  void write(const CtfRecord& record) { write(record.labels, record.features); }

  std::size_t count() const noexcept { return count_; }

 private:
  void check_dims(std::size_t labels, std::size_t features);
  void emit(const std::string& line);

  std::ostream& sink_;
  std::size_t count_ = 0;
  std::size_t label_dim_ = 0;
  std::size_t feature_dim_ = 0;
  std::string line_;
};

// Reads records lazily; memory use is bounded by one line.
class CtfReader {
 public:
  CtfReader(std::istream& source, std::size_t label_dim, std::size_t feature_dim)
      : source_(source), label_dim_(label_dim), feature_dim_(feature_dim) {}

  // False at end of stream. Throws ParseError with the line number.
  bool next(CtfRecord& record);

  std::size_t line_number() const noexcept { return line_no_; }

 private:
  std::istream& source_;
  std::size_t label_dim_;
  std::size_t feature_dim_;
  std::size_t line_no_ = 0;
  std::string line_;
};

std::size_t write_ctf(std::span<const CtfRecord> records, std::ostream& sink);
std::vector<CtfRecord> parse_ctf(std::istream& source, std::size_t label_dim, std::size_t feature_dim);

// Shortest round-trip decimal; integral values print without a decimal point.
void append_number(std::string& out, double value);

}  // namespace trendcnn
