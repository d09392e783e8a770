#include "trendcnn/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trendcnn/error.hpp"
#include "trendcnn/marketdata.hpp"

namespace trendcnn::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

bool valid_meta_token(const std::string& s) {
  return !s.empty() && s.find_first_of(" \t\r\n") == std::string::npos;
}

}  // namespace

std::string serialize_checkpoint(const Network& net, const std::map<std::string, std::string>& metadata) {
  std::ostringstream out;
  const auto& in = net.input_shape();
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "input " << in.channels << ' ' << in.height << ' ' << in.width << '\n';
  out << "seed " << net.seed() << '\n';
  out << "input_scale " << format_number(net.input_scale()) << '\n';
  for (const auto& [k, v] : metadata) {
    if (!valid_meta_token(k) || v.find('\n') != std::string::npos) {
      throw ValidationError("checkpoint metadata key or value not representable: '" + k + "'");
    }
    out << "meta " << k << ' ' << v << '\n';
  }
  for (const auto& spec : net.layers()) out << "layer " << to_string(spec) << '\n';
  out << "params " << net.param_count() << '\n';
  out << "end\n";
  std::string text = out.str();
  const auto params = net.params();
  const std::size_t header = text.size();
  text.resize(header + params.size() * sizeof(double));
  std::memcpy(text.data() + header, params.data(), params.size() * sizeof(double));
  return text;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw ParseError("truncated checkpoint header", line_no + 1);
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return line;
  };

  {
    std::istringstream first(next_line());
    std::string magic;
    int version = 0;
    if (!(first >> magic >> version) || magic != kCheckpointMagic) throw ParseError("not a checkpoint file", 1);
    if (version != kCheckpointVersion) {
      throw ParseError("unsupported checkpoint version " + std::to_string(version), 1);
    }
  }

  Shape3 input;
  std::uint64_t seed = 0;
  double input_scale = 1.0;
  std::map<std::string, std::string> metadata;
  std::vector<LayerSpec> layers;
  std::size_t param_count = 0;
  bool have_params = false;
  for (;;) {
    const std::string line = next_line();
    if (line == "end") break;
    const auto sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
    std::istringstream fields(rest);
    if (key == "input") {
      if (!(fields >> input.channels >> input.height >> input.width)) throw ParseError("bad input shape", line_no);
    } else if (key == "seed") {
      if (!(fields >> seed)) throw ParseError("bad seed", line_no);
    } else if (key == "input_scale") {
      try {
        input_scale = std::stod(rest);
      } catch (const std::exception&) {
        throw ParseError("bad input_scale", line_no);
      }
    } else if (key == "meta") {
      const auto msp = rest.find(' ');
      if (msp == std::string::npos) throw ParseError("bad metadata line", line_no);
      metadata[rest.substr(0, msp)] = rest.substr(msp + 1);
    } else if (key == "layer") {
      try {
        layers.push_back(parse_layer_spec(rest));
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no);
      }
    } else if (key == "params") {
      if (!(fields >> param_count)) throw ParseError("bad parameter count", line_no);
      have_params = true;
    } else {
      throw ParseError("unknown checkpoint field '" + key + "'", line_no);
    }
  }
  if (!have_params) throw ParseError("checkpoint header has no parameter count");

  Network net(input, std::move(layers), seed);
  if (net.param_count() != param_count) {
    throw ParseError("checkpoint declares " + std::to_string(param_count) + " parameters, architecture needs " +
                     std::to_string(net.param_count()));
  }
  if (bytes.size() - pos != param_count * sizeof(double)) {
    throw ParseError("checkpoint parameter block has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                     std::to_string(param_count * sizeof(double)));
  }
  auto params = net.params();
  std::memcpy(params.data(), bytes.data() + pos, param_count * sizeof(double));
  net.set_input_scale(input_scale);
  return {std::move(net), std::move(metadata)};
}

void save_checkpoint(const std::string& path, const Network& net, const std::map<std::string, std::string>& metadata) {
  const std::string bytes = serialize_checkpoint(net, metadata);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("io", "write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_checkpoint(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace trendcnn::nn
