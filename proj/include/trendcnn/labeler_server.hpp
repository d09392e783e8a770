#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace trendcnn {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// JSON endpoints of the labeling tool, independent of the transport.
//   GET  /api/stocks                    -> ["id", ...]
//   GET  /api/series/{id}?scale=log|raw -> {"stock_id","scale","bars":[{date,open,high,low,close}]}
//   GET  /api/labels/{id}[?expert=e]    -> one label file, or {"stock_id","files":[...]} for all experts
//   POST /api/labels/{id}               -> label file body; 422 with offending indices on bad windows
class LabelerApi {
 public:
  LabelerApi(std::string series_dir, std::string labels_dir);

  ApiResponse stocks() const;
  ApiResponse series(const std::string& id, const std::string& scale) const;
  ApiResponse labels(const std::string& id, const std::string& expert) const;
  ApiResponse save_labels(const std::string& id, const std::string& body);

 private:
  std::mutex& stock_mutex(const std::string& id);

  std::string series_dir_;
  std::string labels_dir_;
  std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> stock_mutexes_;
};

struct LabelerConfig {
  std::string series_dir;
  std::string labels_dir;
  std::string ui_dir;  // static assets; a built-in placeholder page when empty
  std::string host = "127.0.0.1";
  int port = 8080;     // 0 picks a free port
};

class LabelerServer {
 public:
  explicit LabelerServer(LabelerConfig cfg);
  ~LabelerServer();

  // Binds the socket and returns the port. Throws Error("io") when busy.
  int bind();
  // Serves until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trendcnn
