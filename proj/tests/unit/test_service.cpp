#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "fixtures.hpp"
#include "xbadp/service.hpp"

using namespace xbadp;
using nlohmann::json;

namespace {

Instance desk() {
    fx::Builder b(40, 4);
    b.source({{10, 4}}, 0.5, {1.0});
    b.source({{10, 2}, {14, 2}}, 0.3);
    b.source({{20, 6}}, 0.4, {1.5});
    b.xb(5, 34).xb(8, 37).ot(9);
    return b.inst;
}

ServiceOptions quick() {
    ServiceOptions o;
    o.train.loss.n_scenarios = 100;
    return o;
}

json body(const ServiceResponse& r) { return json::parse(r.body); }

std::string create(DispatchService& svc, json extra = json::object()) {
    extra["schedule"] = json::parse(save_schedule(desk()));
    const auto r = svc.handle("POST", "/sessions", extra.dump());
    REQUIRE(r.status == 201);
    return body(r)["id"];
}

long long version(DispatchService& svc, const std::string& id) {
    return body(svc.handle("GET", "/sessions/" + id + "/state", ""))["version"];
}

ServiceResponse post(DispatchService& svc, const std::string& id, const std::string& action, json req,
                     bool with_version = true) {
    if (with_version) req["version"] = version(svc, id);
    return svc.handle("POST", "/sessions/" + id + "/" + action, req.dump());
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("creating sessions") {
    DispatchService svc(quick());
    SUBCASE("valid payload") {
        json req{{"schedule", save_schedule(desk())}, {"policy", "approx"}};
        const auto r = svc.handle("POST", "/sessions", req.dump());
        CHECK(r.status == 201);
        const auto b = body(r);
        CHECK(b["id"] == "s1");
        CHECK(b["state"]["t"] == 0);
        CHECK(b["instance_hash"] == instance_hash(desk()));
        CHECK(svc.session_count() == 1u);
    }
    SUBCASE("malformed schedule lists violations") {
        auto s = json::parse(save_schedule(desk()));
        s["pieces"][0]["duration"] = 0;
        const auto r = svc.handle("POST", "/sessions", json{{"schedule", s}}.dump());
        CHECK(r.status == 400);
        CHECK(body(r)["code"] == "invalid_schedule");
        CHECK_FALSE(body(r)["details"].empty());
        CHECK(svc.handle("POST", "/sessions", "{not json").status == 400);
    }
    SUBCASE("artifact hash mismatch") {
        Instance other = desk();
        other.pieces[0].reward = 7.0;
        const auto art = save_artifacts(train_artifacts(other, quick().train));
        json req{{"schedule", save_schedule(desk())}, {"artifacts", art}};
        const auto r = svc.handle("POST", "/sessions", req.dump());
        CHECK(r.status == 409);
        CHECK(body(r)["code"] == "artifact_mismatch");
    }
    SUBCASE("initial reveal by source") {
        const auto id = create(svc, {{"initial_reveal", {{"sources", {1}}}}});
        CHECK(body(svc.handle("GET", "/sessions/" + id + "/state", ""))["open"] == json({1, 2}));
    }
    SUBCASE("unknown keys and policies") {
        CHECK(svc.handle("POST", "/sessions", json{{"schedule", save_schedule(desk())}, {"bogus", 1}}.dump()).status == 400);
        const auto r = svc.handle("POST", "/sessions", json{{"schedule", save_schedule(desk())}, {"policy", "pi"}}.dump());
        CHECK(r.status == 400);
        CHECK(body(r)["code"] == "bad_policy");
    }
}

TEST_CASE("routing and errors") {
    DispatchService svc(quick());
    const auto id = create(svc);
    CHECK(svc.handle("GET", "/sessions/nope/state", "").status == 404);
    CHECK(body(svc.handle("GET", "/sessions/nope/state", ""))["code"] == "unknown_session");
    CHECK(svc.handle("GET", "/sessions/" + id + "/bogus", "").status == 404);
    CHECK(svc.handle("GET", "/elsewhere", "").status == 404);
    CHECK(svc.handle("DELETE", "/sessions/" + id + "/state", "").status == 405);
    const auto r = post(svc, id, "commit", {{"decisions", json::object()}}, false);
    CHECK(r.status == 400);
    CHECK(body(r)["code"] == "missing_version");
    const auto e = body(r);
    CHECK(e.contains("message"));
    CHECK(e["details"].is_array());
}

TEST_CASE("an epoch through the API") {
    DispatchService svc(quick());
    const auto id = create(svc);
    // Walk to t = 10 with empty commits.
    for (int t = 0; t < 10; ++t) {
        REQUIRE(post(svc, id, "commit", {{"decisions", json::object()}}).status == 200);
        REQUIRE(post(svc, id, "advance", json::object()).status == 200);
    }
    auto r = post(svc, id, "open-work", {{"pieces", {0}}});
    REQUIRE(r.status == 200);
    CHECK(body(r)["state"]["open"] == json({0}));
    CHECK(post(svc, id, "open-work", {{"pieces", {0}}}).status == 200);  // duplicate: no-op

    const auto rec = body(svc.handle("GET", "/sessions/" + id + "/recommendation", ""));
    CHECK(rec == body(svc.handle("GET", "/sessions/" + id + "/recommendation", "")));
    CHECK(rec["explanation"]["objective_delta"].get<double>() > 0.0);

    const auto pv = svc.handle("POST", "/sessions/" + id + "/preview", json{{"sources", {1}}}.dump());
    CHECK(pv.status == 200);
    CHECK(body(pv)["preview"] == true);
    CHECK(body(svc.handle("GET", "/sessions/" + id + "/state", ""))["open"] == json({0}));
    CHECK(svc.handle("POST", "/sessions/" + id + "/preview", json{{"pieces", {99}}}.dump()).status == 422);

    Decisions clash;
    clash.xb_assign[0] = {0};
    clash.xb_assign[1] = {0};
    r = post(svc, id, "commit", {{"decisions", decisions_to_json(clash)}});
    CHECK(r.status == 422);
    CHECK(body(r)["code"] == "infeasible");

    r = post(svc, id, "commit", {{"decisions", rec["decisions"]}});
    REQUIRE(r.status == 200);
    CHECK(body(r)["reward"].get<double>() == doctest::Approx(rec["immediate_reward"].get<double>()));
    const auto m = body(svc.handle("GET", "/sessions/" + id + "/metrics", ""));
    CHECK(m["commits"] == 11);
    CHECK(m["total_reward"].get<double>() == doctest::Approx(1.0));

    const auto v = body(svc.handle("GET", "/sessions/" + id + "/values", "", {{"xb", "1"}}));
    CHECK(v["xbs"].size() == 1u);
    CHECK(v["xbs"][0]["driver"] == 1);
    CHECK(svc.handle("GET", "/sessions/" + id + "/values", "", {{"xb", "x"}}).status == 400);

    r = post(svc, id, "open-work", {{"pieces", {1}}});  // starts at 10, already committed
    CHECK(r.status == 422);
    CHECK(body(r)["code"] == "past_start");

    const auto log = body(svc.handle("GET", "/sessions/" + id + "/log", ""));
    CHECK(replay_log(desk(), log_from_json(log)) == replay_log(desk(), log_from_json(log)));
    CHECK(log["events"].size() == 10u * 2 + 2);
}

TEST_CASE("stale versions and concurrent mutations") {
    DispatchService svc(quick());
    const auto id = create(svc, {{"policy", "myopic_xb_first"}});
    const auto v = version(svc, id);
    json req{{"version", v}, {"decisions", json::object()}};
    SUBCASE("sequential") {
        CHECK(svc.handle("POST", "/sessions/" + id + "/commit", req.dump()).status == 200);
        const auto r = svc.handle("POST", "/sessions/" + id + "/commit", req.dump());
        CHECK(r.status == 409);
        CHECK(body(r)["code"] == "version_conflict");
    }
    SUBCASE("racing threads: one wins, the rest conflict") {
        std::atomic<int> wins{0}, conflicts{0};
        std::vector<std::thread> ts;
        for (int n = 0; n < 8; ++n)
            ts.emplace_back([&] {
                const auto r = svc.handle("POST", "/sessions/" + id + "/commit", req.dump());
                if (r.status == 200) ++wins;
                else if (r.status == 409) ++conflicts;
            });
        for (auto& t : ts) t.join();
        CHECK(wins == 1);
        CHECK(conflicts == 7);
    }
    SUBCASE("reads while writing") {
        std::atomic<bool> stop{false};
        std::atomic<int> bad{0};
        std::thread reader([&] {
            while (!stop) {
                const auto r = svc.handle("GET", "/sessions/" + id + "/state", "");
                if (r.status != 200 || !json::parse(r.body).contains("t")) ++bad;
            }
        });
        for (int t = 0; t < 39; ++t) {
            REQUIRE(post(svc, id, "commit", {{"decisions", json::object()}}).status == 200);
            REQUIRE(post(svc, id, "advance", json::object()).status == 200);
        }
        stop = true;
        reader.join();
        CHECK(bad == 0);
    }
}

TEST_CASE("many sessions at once") {
    DispatchService svc(quick());
    std::vector<std::thread> ts;
    for (int n = 0; n < 6; ++n) ts.emplace_back([&] { create(svc, {{"policy", "myopic_ot_first"}}); });
    for (auto& t : ts) t.join();
    CHECK(svc.session_count() == 6u);
}

TEST_CASE("closing a session") {
    DispatchService svc(quick());
    const auto id = create(svc, {{"policy", "myopic_xb_first"}, {"clock", "auto"}, {"seed", 3}});
    CHECK(post(svc, id, "commit", {{"decisions", json::object()}}).status == 200);
    CHECK(post(svc, id, "advance", {{"pieces", json::array()}}).status == 422);
    ServiceResponse last;
    for (int t = 0; t < 40; ++t) {
        if (t > 0) REQUIRE(post(svc, id, "commit", {{"decisions", json::object()}}).status == 200);
        last = post(svc, id, "advance", json::object());
        REQUIRE(last.status == 200);
    }
    CHECK(body(last)["closed"] == true);
    const auto r = post(svc, id, "commit", {{"decisions", json::object()}});
    CHECK(r.status == 409);
    CHECK(body(r)["code"] == "session_closed");
}

TEST_CASE("HTTP round trip") {
    DispatchService svc(quick());
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);
    json req{{"schedule", save_schedule(desk())}, {"policy", "myopic_xb_first"}};
    auto r = cli.Post("/sessions", req.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 201);
    const std::string id = json::parse(r->body)["id"];
    r = cli.Get("/sessions/" + id + "/state");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body)["t"] == 0);
    r = cli.Post("/sessions/" + id + "/commit", json{{"version", 0}, {"decisions", json::object()}}.dump(),
                 "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    r = cli.Get("/sessions/" + id + "/values?xb=0");
    REQUIRE(r);
    CHECK(r->status == 422);  // myopic sessions carry no value tables
    r = cli.Get("/sessions/nope/metrics");
    REQUIRE(r);
    CHECK(r->status == 404);
    server.stop();
    th.join();
}

}  // TEST_SUITE
