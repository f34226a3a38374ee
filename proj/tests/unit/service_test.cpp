#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>

#include "rankforge/history.hpp"
#include "rankforge/serialize.hpp"
#include "rankforge/service.hpp"
#include "rankforge/synthetic.hpp"

using namespace rankforge;
using service::Api;
using service::Query;

namespace {

std::filesystem::path fresh_data_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto spec = default_spec();
  const auto table = generate_synthetic(SyntheticConfig::with_random_forms(spec, 25, 4, 42));
  write_file(dir / "spec.json", spec_to_json(spec).dump(2));
  save_history(dir / "history.csv", table.rows, spec);
  return dir;
}

const char* kCreateBody = R"({
  "baseline": {"rankee_id": "R001"},
  "ranges": [{"attribute": "faculty", "min": 1000, "max": 5000, "step": 1000},
             {"attribute": "students", "values": [15000, 30000, 45000]}],
  "rivals": ["R002", "R003"],
  "fit": {"members": 20, "seed": 3},
  "session_id": "svc"
})";

Json call(Api& api, std::string_view method, std::string_view path, const Query& q = {},
          std::string_view body = {}, int expect = 200) {
  const auto r = api.handle(method, path, q, body);
  EXPECT_EQ(r.status, expect) << path << " -> " << r.body;
  return Json::parse(r.body);
}

}  // namespace

TEST(Api, HealthAndUnknownRoutes) {
  Api api({fresh_data_dir("rf_api_health")});
  EXPECT_EQ(call(api, "GET", "/health")["status"], "ok");
  const auto missing = call(api, "GET", "/api/sessions/none/scenarios", {}, {}, 404);
  EXPECT_EQ(missing["status"], "error");
  EXPECT_EQ(missing["error"]["code"], "not_found");
  EXPECT_FALSE(missing.contains("payload"));
  call(api, "GET", "/nowhere", {}, {}, 404);
}

TEST(Api, SessionLifecycle) {
  const auto dir = fresh_data_dir("rf_api_lifecycle");
  Api api({dir});
  const auto created = call(api, "POST", "/api/sessions", {}, kCreateBody);
  const auto count = created["payload"]["scenario_count"].get<std::size_t>();
  EXPECT_EQ(count, 15u);
  EXPECT_TRUE(std::filesystem::exists(dir / "sessions" / "svc.json"));

  const auto list = call(api, "GET", "/api/sessions/svc/scenarios", {{"page_size", "4"}});
  EXPECT_EQ(list["payload"]["total"], count);
  EXPECT_EQ(list["payload"]["rows"].size(), 4u);

  const auto a = api.handle("GET", "/api/sessions/svc/scenarios", {{"sort", "final"}, {"dir", "asc"}}, {});
  const auto b = api.handle("GET", "/api/sessions/svc/scenarios", {{"sort", "final"}, {"dir", "asc"}}, {});
  EXPECT_EQ(a.body, b.body);

  const auto filtered = call(api, "POST", "/api/sessions/svc/filters", {}, R"({"filter": "ind:SFRI mean>0"})");
  const auto n = filtered["payload"]["filtered_count"].get<std::size_t>();
  EXPECT_EQ(call(api, "GET", "/api/sessions/svc/scenarios")["payload"]["total"], n);
  const auto summary = call(api, "GET", "/api/sessions/svc/summary", {{"subject", "final"}, {"bins", "5"}});
  std::size_t mass = 0;
  for (const auto& f : summary["payload"]["frequencies"]) mass += f.get<std::size_t>();
  EXPECT_EQ(mass, n);

  const auto undone = call(api, "DELETE", "/api/sessions/svc/filters/last");
  EXPECT_EQ(undone["payload"]["filtered_count"], count);
  call(api, "DELETE", "/api/sessions/svc/filters/last", {}, {}, 400);

  const auto infl = call(api, "GET", "/api/sessions/svc/influence", {{"scenarios", "0,3"}});
  EXPECT_EQ(infl["payload"]["selection_id"], "0,3");
  const auto heat = call(api, "GET", "/api/sessions/svc/rivals/heatmap", {{"scenario", "2"}});
  EXPECT_EQ(heat["payload"]["cells"].size(), 2u * 3u * 7u);
  const auto radar = call(api, "GET", "/api/sessions/svc/rivals/radar",
                          {{"scenario", "2"}, {"method", "carry_forward"}, {"highlight", "R003"}});
  EXPECT_EQ(radar["payload"]["subjects"].size(), 7u);
  call(api, "GET", "/api/sessions/svc/rivals/radar", {{"scenario", "2"}, {"method", "psychic"}}, {}, 400);
  call(api, "GET", "/api/sessions/svc/scenarios/999", {}, {}, 404);

  // a fresh Api over the same directory reloads the persisted session
  Api reopened({dir});
  EXPECT_EQ(call(reopened, "GET", "/api/sessions/svc")["payload"]["scenario_count"], count);
}

TEST(Api, BadRequestsCarryLocations) {
  Api api({fresh_data_dir("rf_api_bad")});
  auto r = call(api, "POST", "/api/sessions", {}, "{\"baseline\": ", 400);
  EXPECT_EQ(r["error"]["code"], "parse");
  r = call(api, "POST", "/api/sessions", {},
           R"({"baseline": "R001", "cap": 100, "ranges": [{"attribute": "faculty", "min": 100, "max": 6000, "step": 1}]})", 422);
  EXPECT_EQ(r["error"]["code"], "capacity");
  call(api, "POST", "/api/sessions", {}, kCreateBody);
  r = call(api, "GET", "/api/sessions/svc/scenarios", {{"filter", "ind:NOPE mean>0"}}, {}, 400);
  EXPECT_EQ(r["error"]["location"], "filter[0]");
}

TEST(Server, ServesOverSocketAndRejectsTakenPort) {
  const auto dir = fresh_data_dir("rf_server");
  service::Server server({"127.0.0.1", 0, dir});
  std::thread t([&] { server.run(); });
  httplib::Client client("127.0.0.1", server.port());
  auto health = client.Get("/health");
  for (int i = 0; i < 50 && !health; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    health = client.Get("/health");
  }
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(Json::parse(health->body)["status"], "ok");

  const auto created = client.Post("/api/sessions", kCreateBody, "application/json");
  ASSERT_TRUE(created);
  const auto count = Json::parse(created->body)["payload"]["scenario_count"];
  const auto list = client.Get("/api/sessions/svc/scenarios?page=1");
  ASSERT_TRUE(list);
  EXPECT_EQ(Json::parse(list->body)["payload"]["total"], count);
  EXPECT_EQ(client.Get("/api/sessions/zzz")->status, 404);

  try {
    service::Server clash({"127.0.0.1", server.port(), dir});
    ADD_FAILURE() << "second bind succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
  server.stop();
  t.join();
}
