#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rankforge/error.hpp"
#include "rankforge/session.hpp"

namespace rankforge::service {

using Json = nlohmann::json;
using Query = std::map<std::string, std::string, std::less<>>;

/// HTTP status used for an error envelope carrying `code`.
int http_status(ErrorCode code) noexcept;

Json ok_envelope(Json payload);
Json error_envelope(const Error& error);

/// Directory layout: spec.json, history.csv and sessions/. The spec and
/// history files are defaults for requests that do not carry their own.
struct DataDir {
  std::filesystem::path root;

  /// `RANKFORGE_DATA_DIR` when set, otherwise `fallback`.
  static DataDir resolve(const std::filesystem::path& fallback);

  std::filesystem::path spec_path() const { return root / "spec.json"; }
  std::filesystem::path history_path() const { return root / "history.csv"; }
  std::filesystem::path sessions_path() const { return root / "sessions"; }
};

/// Builds a session request from the POST body. Recognised keys: spec,
/// history_csv, baseline ({rankee_id, year} or a bare id), ranges, rivals,
/// fit {members, ridge_lambda, seed}, cap, trend_window, delta_fraction,
/// session_id. Missing spec and history fall back to the data directory.
SessionRequest session_request_from_json(const Json& body, const DataDir& dir);

struct Response {
  int status = 200;
  std::string body;
};

/// Request router shared by the socket server and in-process callers.
class Api {
 public:
  explicit Api(DataDir dir);

  Response handle(std::string_view method, std::string_view path, const Query& query,
                  std::string_view body);

  SessionStore& store() noexcept { return store_; }

 private:
  Json route(std::string_view method, std::string_view path, const Query& query,
             std::string_view body);

  DataDir dir_;
  SessionStore store_;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = ".";
};

/// Binds the port (Error(io) if it is taken) and serves until stop().
class Server {
 public:
  explicit Server(const ServeConfig& config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Port actually bound; differs from the configured one when it was 0.
  int port() const noexcept { return port_; }
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace rankforge::service
