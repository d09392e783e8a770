#include "trendcnn/labeler_server.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "trendcnn/error.hpp"
#include "trendcnn/labelstore.hpp"
#include "trendcnn/marketdata.hpp"
#include "trendcnn/pipeline.hpp"

namespace trendcnn {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

ApiResponse error_response(int status, const std::string& code, const std::string& message, json extra = {}) {
  json j = {{"error", code}, {"message", message}};
  if (extra.is_object()) j.update(extra);
  return {status, j.dump(), "application/json"};
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-' || c == '.'; });
}

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>labeler</title></head>"
    "<body><p>No UI assets configured. Start the server with --ui-dir to serve the labeling app.</p>"
    "<p>API: <a href=\"/api/stocks\">/api/stocks</a></p></body></html>\n";

}  // namespace

LabelerApi::LabelerApi(std::string series_dir, std::string labels_dir)
    : series_dir_(std::move(series_dir)), labels_dir_(std::move(labels_dir)) {}

std::mutex& LabelerApi::stock_mutex(const std::string& id) {
  std::lock_guard lock(map_mutex_);
  auto& m = stock_mutexes_[id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

ApiResponse LabelerApi::stocks() const {
  json ids = json::array();
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(series_dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  for (auto& n : names) ids.push_back(n);
  return {200, ids.dump(), "application/json"};
}

ApiResponse LabelerApi::series(const std::string& id, const std::string& scale) const {
  if (!valid_id(id)) return error_response(400, "invalid", "bad stock id");
  if (!scale.empty() && scale != "log" && scale != "raw") return error_response(400, "invalid", "scale must be log or raw");
  const fs::path path = fs::path(series_dir_) / (id + ".csv");
  if (!fs::exists(path)) return error_response(404, "not_found", "no series '" + id + "'");
  OhlcSeries s = load_ohlc_csv(path.string());
  if (scale == "log") s = to_log(s);
  json bars = json::array();
  for (const auto& b : s.bars) {
    bars.push_back({{"date", format_date(b.date)}, {"open", b.open}, {"high", b.high}, {"low", b.low}, {"close", b.close}});
  }
  json j = {{"stock_id", s.stock_id}, {"scale", scale == "log" ? "log" : "raw"}, {"bars", bars}};
  return {200, j.dump(), "application/json"};
}

ApiResponse LabelerApi::labels(const std::string& id, const std::string& expert) const {
  if (!valid_id(id)) return error_response(400, "invalid", "bad stock id");
  if (!expert.empty()) {
    if (!valid_id(expert)) return error_response(400, "invalid", "bad expert id");
    const fs::path path = fs::path(labels_dir_) / label_file_name(id, expert);
    if (!fs::exists(path)) return error_response(404, "not_found", "no labels for '" + id + "' by '" + expert + "'");
    return {200, serialize_label_json(load_label_file(path.string())), "application/json"};
  }
  json files = json::array();
  std::vector<fs::path> paths;
  const std::string prefix = id + "__";
  for (const auto& e : fs::directory_iterator(labels_dir_)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && e.path().extension() == ".json" && name.rfind(prefix, 0) == 0) paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) files.push_back(json::parse(serialize_label_json(load_label_file(p.string()))));
  return {200, json{{"stock_id", id}, {"files", files}}.dump(), "application/json"};
}

ApiResponse LabelerApi::save_labels(const std::string& id, const std::string& body) {
  if (!valid_id(id)) return error_response(400, "invalid", "bad stock id");
  LabelFile file;
  try {
    file = parse_label_json(body);
  } catch (const ParseError& e) {
    return error_response(400, "parse", e.what());
  }
  if (file.stock_id != id) return error_response(400, "invalid", "body stock_id does not match the URL");
  if (!valid_id(file.expert_id)) return error_response(400, "invalid", "bad expert id");
  const fs::path series_path = fs::path(series_dir_) / (id + ".csv");
  if (!fs::exists(series_path)) return error_response(404, "not_found", "no series '" + id + "'");
  const std::size_t length = load_ohlc_csv(series_path.string()).size();

  for (std::size_t i = 0; i < file.windows.size(); ++i) {
    const auto& w = file.windows[i];
    if (w.start > w.end) return error_response(422, "invalid", "window start after end", {{"indices", {i}}});
    if (w.end >= length) return error_response(422, "invalid", "window beyond series end", {{"indices", {i}}});
  }
  if (const auto overlap = find_overlap(file.windows)) {
    return error_response(422, "overlap", "windows overlap or are out of order",
                          {{"indices", {overlap->first, overlap->second}}});
  }

  std::lock_guard lock(stock_mutex(id));
  save_label_file((fs::path(labels_dir_) / label_file_name(id, file.expert_id)).string(), file);
  return {200, json{{"saved", file.windows.size()}, {"stock_id", id}, {"expert_id", file.expert_id}}.dump(),
          "application/json"};
}

struct LabelerServer::Impl {
  LabelerConfig cfg;
  LabelerApi api;
  httplib::Server server;

  explicit Impl(LabelerConfig c) : cfg(std::move(c)), api(cfg.series_dir, cfg.labels_dir) {}
};

LabelerServer::LabelerServer(LabelerConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {
  const auto& c = impl_->cfg;
  if (!fs::is_directory(c.series_dir)) throw Error("io", "series dir does not exist: " + c.series_dir);
  if (!fs::is_directory(c.labels_dir)) throw Error("io", "labels dir does not exist: " + c.labels_dir);
  {
    const fs::path probe = fs::path(c.labels_dir) / ".write-probe";
    std::ofstream out(probe);
    if (!out) throw Error("io", "labels dir is not writable: " + c.labels_dir);
    out.close();
    fs::remove(probe);
  }

  auto& srv = impl_->server;
  auto& api = impl_->api;
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto guarded = [reply](auto fn) {
    return [reply, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, fn(req));
      } catch (const Error& e) {
        reply(res, error_response(500, e.code(), e.what()));
      } catch (const std::exception& e) {
        reply(res, error_response(500, "internal", e.what()));
      }
    };
  };

  srv.Get("/api/stocks", guarded([&api](const httplib::Request&) { return api.stocks(); }));
  srv.Get(R"(/api/series/([^/]+))", guarded([&api](const httplib::Request& req) {
            return api.series(req.matches[1], req.has_param("scale") ? req.get_param_value("scale") : "");
          }));
  srv.Get(R"(/api/labels/([^/]+))", guarded([&api](const httplib::Request& req) {
            return api.labels(req.matches[1], req.has_param("expert") ? req.get_param_value("expert") : "");
          }));
  srv.Post(R"(/api/labels/([^/]+))",
           guarded([&api](const httplib::Request& req) { return api.save_labels(req.matches[1], req.body); }));

  if (!c.ui_dir.empty()) {
    if (!srv.set_mount_point("/", c.ui_dir)) throw Error("io", "ui dir does not exist: " + c.ui_dir);
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kPlaceholderPage, "text/html"); });
  }
}

LabelerServer::~LabelerServer() { stop(); }

int LabelerServer::bind() {
  auto& c = impl_->cfg;
  if (c.port == 0) {
    const int port = impl_->server.bind_to_any_port(c.host);
    if (port < 0) throw Error("io", "cannot bind " + c.host);
    c.port = port;
  } else if (!impl_->server.bind_to_port(c.host, c.port)) {
    throw Error("io", "cannot bind " + c.host + ":" + std::to_string(c.port) + " (port busy?)");
  }
  return c.port;
}

void LabelerServer::run() { impl_->server.listen_after_bind(); }

void LabelerServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace trendcnn
