#include "rankforge/service.hpp"

#include <cstdlib>
#include <vector>

#include <httplib.h>

#include "rankforge/history.hpp"
#include "rankforge/serialize.hpp"
#include "rankforge/text.hpp"

namespace rankforge::service {

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::capacity:
    case ErrorCode::training:
    case ErrorCode::no_baseline:
    case ErrorCode::version: return 422;
    case ErrorCode::io: return 500;
    default: return 400;
  }
}

Json ok_envelope(Json payload) { return {{"status", "ok"}, {"payload", std::move(payload)}}; }

Json error_envelope(const Error& error) {
  Json err = {{"code", std::string(to_string(error.code()))}, {"message", error.what()}};
  if (!error.location().empty()) err["location"] = error.location();
  return {{"status", "error"}, {"error", std::move(err)}};
}

DataDir DataDir::resolve(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("RANKFORGE_DATA_DIR"); env != nullptr && *env != '\0') {
    return {env};
  }
  return {fallback};
}

SessionRequest session_request_from_json(const Json& body, const DataDir& dir) {
  if (!body.is_object()) throw Error(ErrorCode::schema, "request body must be a JSON object", "body");
  try {
    SessionRequest req;
    if (body.contains("spec")) {
      req.spec = spec_from_json(body["spec"]);
    } else if (std::filesystem::exists(dir.spec_path())) {
      req.spec = spec_from_json(parse_json(read_file(dir.spec_path())));
    } else {
      throw Error(ErrorCode::schema, "no spec in request and no spec.json in the data directory", "spec");
    }
    req.spec.validate();

    if (body.contains("history_csv")) {
      req.history = parse_history(body["history_csv"].get<std::string>(), req.spec, "request").rows;
    } else if (std::filesystem::exists(dir.history_path())) {
      req.history = load_history(dir.history_path(), req.spec).rows;
    } else {
      throw Error(ErrorCode::schema, "no history_csv in request and no history.csv in the data directory",
                  "history_csv");
    }

    if (!body.contains("baseline")) throw Error(ErrorCode::schema, "missing baseline", "baseline");
    const auto& b = body["baseline"];
    if (b.is_string()) {
      req.baseline_rankee = b.get<std::string>();
    } else {
      req.baseline_rankee = b.at("rankee_id").get<std::string>();
      if (b.contains("year") && !b["year"].is_null()) req.baseline_year = b["year"].get<int>();
    }

    if (body.contains("ranges")) {
      for (const auto& r : body["ranges"]) req.ranges.push_back(range_from_json(r));
    }
    if (body.contains("rivals")) req.rivals = body["rivals"].get<std::vector<std::string>>();
    if (body.contains("fit")) {
      const auto& f = body["fit"];
      req.fit.members = f.value("members", req.fit.members);
      req.fit.ridge_lambda = f.value("ridge_lambda", req.fit.ridge_lambda);
      req.fit.seed = f.value("seed", req.fit.seed);
    }
    req.cap = body.value("cap", req.cap);
    req.trend_window = body.value("trend_window", req.trend_window);
    req.delta_fraction = body.value("delta_fraction", req.delta_fraction);
    req.session_id = body.value("session_id", std::string{});
    return req;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("session request: ") + e.what(), "body");
  }
}

namespace {

std::vector<std::string_view> path_parts(std::string_view path) {
  std::vector<std::string_view> parts;
  for (auto p : split(path, '/')) {
    if (!p.empty()) parts.push_back(p);
  }
  return parts;
}

std::optional<std::string_view> param(const Query& query, std::string_view key) {
  const auto it = query.find(key);
  if (it == query.end() || it->second.empty()) return std::nullopt;
  return std::string_view(it->second);
}

std::size_t positive(const Query& query, std::string_view key, std::size_t fallback) {
  const auto v = param(query, key);
  if (!v) return fallback;
  const auto n = parse_integer(*v, key);
  if (n < 1) throw Error(ErrorCode::validation, std::string(key) + " must be >= 1", std::string(key));
  return static_cast<std::size_t>(n);
}

int scenario_param(const Query& query, std::string_view key = "scenario") {
  const auto v = param(query, key);
  if (!v) throw Error(ErrorCode::validation, "missing query parameter", std::string(key));
  return static_cast<int>(parse_integer(*v, key));
}

Subject subject_param(std::string_view text, std::string_view key) {
  try {
    return Subject::parse(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::validation, e.what(), std::string(key));
  }
}

Json session_info(const Session& s) {
  Json filters = Json::array();
  for (const auto& f : s.filter_log()) filters.push_back(f.to_string());
  return {{"session_id", s.id()},
          {"created_at", s.created_at()},
          {"baseline", {{"rankee_id", s.baseline().rankee_id}, {"year", s.baseline().year}}},
          {"scenario_count", s.scenario_count()},
          {"filtered_count", s.current_indices().size()},
          {"filter_log", filters},
          {"rivals", s.rivals()},
          {"spec", spec_to_json(s.spec())}};
}

[[noreturn]] void unknown_route(std::string_view method, std::string_view path) {
  throw Error(ErrorCode::not_found, "no route for " + std::string(method) + " " + std::string(path), "path");
}

}  // namespace

Api::Api(DataDir dir) : dir_(std::move(dir)), store_(dir_.sessions_path()) {}

Response Api::handle(std::string_view method, std::string_view path, const Query& query,
                     std::string_view body) {
  try {
    return {200, ok_envelope(route(method, path, query, body)).dump()};
  } catch (const Error& e) {
    return {http_status(e.code()), error_envelope(e).dump()};
  } catch (const nlohmann::json::exception& e) {
    const Error err(ErrorCode::schema, e.what());
    return {400, error_envelope(err).dump()};
  } catch (const std::exception& e) {
    const Error err(ErrorCode::io, std::string("internal error: ") + e.what());
    return {500, error_envelope(err).dump()};
  }
}

Json Api::route(std::string_view method, std::string_view path, const Query& query,
                std::string_view body) {
  const auto parts = path_parts(path);
  const bool get = method == "GET";

  if (parts.size() == 1 && parts[0] == "health" && get) {
    return {{"service", "rankforge"}};
  }
  if (parts.size() < 2 || parts[0] != "api" || parts[1] != "sessions") unknown_route(method, path);

  if (parts.size() == 2) {
    if (method != "POST") unknown_route(method, path);
    auto session = Session::create(session_request_from_json(parse_json(body), dir_));
    const auto stored = store_.add(std::move(session));
    return {{"session_id", stored->id()}, {"scenario_count", stored->scenario_count()}};
  }

  const std::string id(parts[2]);
  const auto rest = std::vector<std::string_view>(parts.begin() + 3, parts.end());

  if (method == "POST" && rest.size() == 1 && rest[0] == "filters") {
    const auto doc = parse_json(body);
    auto filter = filter_from_json(doc.is_object() && doc.contains("filter") ? doc["filter"] : doc);
    const auto next = store_.update(id, [&](const Session& s) { return s.with_filter(filter); });
    return {{"session_id", next->id()},
            {"filter_count", next->filter_log().size()},
            {"filtered_count", next->current_indices().size()}};
  }
  if (method == "DELETE" && rest.size() == 2 && rest[0] == "filters" && rest[1] == "last") {
    const auto next = store_.update(id, [](const Session& s) { return s.without_last_filter(); });
    return {{"session_id", next->id()},
            {"filter_count", next->filter_log().size()},
            {"filtered_count", next->current_indices().size()}};
  }
  if (!get) unknown_route(method, path);

  const auto session = store_.get(id);
  const auto& s = *session;
  if (rest.empty()) return session_info(s);

  if (rest[0] == "scenarios" && rest.size() == 1) {
    ScenarioFilter filter;
    if (const auto f = param(query, "filter")) filter = ScenarioFilter::parse(*f);
    std::optional<Subject> sort;
    if (const auto k = param(query, "sort")) sort = subject_param(*k, "sort");
    const auto dir = param(query, "dir") ? parse_sort_direction(*param(query, "dir"))
                                         : SortDirection::descending;
    const auto page = s.page(filter, sort, dir, positive(query, "page", 1),
                             positive(query, "page_size", kDefaultPageSize));
    Json rows = Json::array();
    for (const auto* row : page.rows) rows.push_back(scenario_summary_to_json(*row, s.baseline(), s.spec()));
    return {{"total", page.total},
            {"page", page.page},
            {"page_size", page.page_size},
            {"scenario_count", s.scenario_count()},
            {"rows", rows}};
  }
  if (rest[0] == "scenarios" && rest.size() == 2) {
    return scenario_to_json(s.scenario(static_cast<int>(parse_integer(rest[1], "scenario"))),
                            s.baseline(), s.spec());
  }
  if (rest.size() == 1 && rest[0] == "summary") {
    const auto key = param(query, "subject");
    if (!key) throw Error(ErrorCode::validation, "missing query parameter", "subject");
    return summary_to_json(s.summary(subject_param(*key, "subject"),
                                     positive(query, "bins", kDefaultHistogramBins)));
  }
  if (rest.size() == 1 && rest[0] == "influence") {
    const auto list = param(query, "scenarios");
    if (!list) throw Error(ErrorCode::validation, "missing query parameter", "scenarios");
    std::vector<int> ids;
    for (auto t : split(*list, ',')) ids.push_back(static_cast<int>(parse_integer(trim(t), "scenarios")));
    return influence_to_json(s.influence(ids));
  }
  if (rest.size() == 2 && rest[0] == "rivals" && rest[1] == "heatmap") {
    const auto cells = s.heatmap(scenario_param(query));
    return heatmap_to_json(cells);
  }
  if (rest.size() == 2 && rest[0] == "rivals" && rest[1] == "radar") {
    const auto m = param(query, "method");
    if (!m) throw Error(ErrorCode::validation, "missing query parameter", "method");
    std::optional<std::string> highlight;
    if (const auto h = param(query, "highlight")) highlight = std::string(*h);
    return radar_to_json(s.radar(scenario_param(query), parse_rival_method(*m), highlight));
  }
  unknown_route(method, path);
}

struct Server::Impl {
  explicit Impl(DataDir dir) : api(std::move(dir)) {}
  Api api;
  httplib::Server http;
};

Server::Server(const ServeConfig& config)
    : impl_(std::make_unique<Impl>(DataDir::resolve(config.data_dir))) {
  const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    Query query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const auto out = impl_->api.handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  // SO_REUSEPORT (httplib's default) would let a second server share the port.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  impl_->http.Get(".*", handler);
  impl_->http.Post(".*", handler);
  impl_->http.Delete(".*", handler);

  if (config.port == 0) {
    port_ = impl_->http.bind_to_any_port(config.host);
  } else {
    port_ = impl_->http.bind_to_port(config.host, config.port) ? config.port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::io, "cannot bind " + config.host + ":" + std::to_string(config.port) +
                                   " (port in use?)", "port");
  }
}

Server::~Server() { stop(); }

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace rankforge::service
