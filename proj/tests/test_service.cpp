#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "blendopt/objective.hpp"
#include "blendopt/service.hpp"
#include "support.hpp"

using namespace blendopt;
using io::Json;

namespace {

struct Running {
    Service service;
    int port = 0;
    std::thread thread;

    explicit Running(ServiceOptions o = {})
        : service(std::make_shared<NameModel>(testing::tiny_model()), with_ephemeral(o)) {
        port = service.bind();
        thread = std::thread([this] { service.run(); });
    }
    ~Running() {
        service.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }
    static ServiceOptions with_ephemeral(ServiceOptions o) {
        o.port = 0;
        return o;
    }
};

Json short_schedule() { return {{"t_start", 10.0}, {"t_end", 0.01}, {"gamma", 0.97}}; }

Json fig3_request() {
    return {{"scene", io::histogram_to_json(testing::fig3_spec())}, {"schedule", short_schedule()}, {"seed", 11}};
}

Json poll(httplib::Client& c, const std::string& id) {
    for (int i = 0; i < 600; ++i) {
        auto r = c.Get("/v1/jobs/" + id);
        REQUIRE(r);
        REQUIRE(r->status == 200);
        Json j = Json::parse(r->body);
        if (j["status"] == "done" || j["status"] == "failed") return j;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    FAIL("job did not finish");
    return {};
}

}  // namespace

TEST_CASE("healthz reports version and model size") {
    Running srv;
    auto c = srv.client();
    auto r = c.Get("/v1/healthz");
    REQUIRE(r);
    CHECK(r->status == 200);
    const Json j = Json::parse(r->body);
    CHECK(j["status"] == "ok");
    CHECK(j["name_model"]["bins"] == 9);
}

TEST_CASE("optimize job completes and matches the offline document") {
    Running srv;
    auto c = srv.client();
    auto r = c.Post("/v1/optimize", fig3_request().dump(), "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 202);
    const Json accepted = Json::parse(r->body);
    const std::string id = accepted["job_id"];
    CHECK(r->get_header_value("Location") == "/v1/jobs/" + id);

    const Json job = poll(c, id);
    REQUIRE(job["status"] == "done");
    const Json& result = job["result"];
    CHECK(result["trace_url"] == "/v1/jobs/" + id + "/trace");

    // same inputs through the library give the same document bytes
    const SceneStructure scene = scene_from_histograms(testing::fig3_spec());
    AnnealSchedule sched = io::schedule_from_json(short_schedule());
    sched.seed = 11;
    const ObjectiveConfig cfg;
    const OptimizeResult offline = optimize(scene, testing::tiny_model(), cfg, sched, {});
    const std::string doc = io::write_solution_document(scene, offline.solution, offline.breakdown, cfg, sched, offline.seed);
    CHECK(result["document"].dump(2) + "\n" == doc);
    CHECK(result["score"]["constraints_ok"] == true);

    auto t = c.Get("/v1/jobs/" + id + "/trace");
    REQUIRE(t);
    CHECK(t->status == 200);
    CHECK(t->body == offline.trace.to_csv());
}

TEST_CASE("score endpoint agrees with the library") {
    Running srv;
    auto c = srv.client();
    std::mt19937_64 rng(5);
    const Solution sol = testing::random_solution(3, rng);
    const Json body = {{"scene", io::histogram_to_json(testing::fig3_spec())}, {"solution", io::solution_to_json(sol)}};
    auto r = c.Post("/v1/score", body.dump(), "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 200);
    const Json j = Json::parse(r->body);
    const SceneStructure scene = scene_from_histograms(testing::fig3_spec());
    const ScoreBreakdown b = total_score(scene, sol, {}, testing::tiny_model());
    CHECK(j["score"]["total"].get<double>() == doctest::Approx(b.total).epsilon(1e-12));
}

TEST_CASE("stimuli endpoint returns a histogram and KL values") {
    Running srv;
    auto c = srv.client();
    auto r = c.Post("/v1/stimuli", R"({"classes": 3, "smoothness": "moderate", "seed": 4})", "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 200);
    const Json j = Json::parse(r->body);
    CHECK(j["histogram"]["classes"].size() == 3);
    CHECK(j["kl"].size() == 3);
}

TEST_CASE("malformed requests get 400 with field paths") {
    Running srv;
    auto c = srv.client();

    auto r = c.Post("/v1/optimize", "{not json", "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    CHECK(Json::parse(r->body)["error"]["code"] == "invalid_request");

    Json bad = fig3_request();
    bad["config"] = {{"weights", {1.0, "x", 0.0}}};
    r = c.Post("/v1/optimize", bad.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    CHECK(Json::parse(r->body)["error"]["violations"][0]["path"] == "config.weights[1]");

    bad = fig3_request();
    bad["scene"]["classes"][1]["heights"][2] = -1;
    r = c.Post("/v1/optimize", bad.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    CHECK(Json::parse(r->body)["error"]["violations"][0]["path"] == "scene.classes[1].heights[2]");

    r = c.Post("/v1/stimuli", R"({"classes": 7})", "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    CHECK(Json::parse(r->body)["error"]["violations"][0]["path"] == "body.classes");

    r = c.Post("/v1/score", Json{{"scene", io::histogram_to_json(testing::fig3_spec())}}.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    CHECK(Json::parse(r->body)["error"]["violations"][0]["path"] == "solution");
}

TEST_CASE("unknown jobs are 404") {
    Running srv;
    auto c = srv.client();
    auto r = c.Get("/v1/jobs/job-999999");
    REQUIRE(r);
    CHECK(r->status == 404);
    r = c.Get("/v1/jobs/job-999999/trace");
    REQUIRE(r);
    CHECK(r->status == 404);
}

TEST_CASE("infeasible start is reported on the job") {
    Running srv;
    auto c = srv.client();
    Json body = fig3_request();
    body["config"] = {{"jnd_threshold", 500.0}};
    auto r = c.Post("/v1/optimize", body.dump(), "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 202);
    const Json job = poll(c, Json::parse(r->body)["job_id"]);
    CHECK(job["status"] == "failed");
    CHECK(job["error"]["code"] == "infeasible_start");
}

TEST_CASE("a busy port is refused") {
    Running first;
    ServiceOptions o;
    o.port = first.port;
    Service second(std::make_shared<NameModel>(testing::tiny_model()), o);
    CHECK_THROWS_AS(second.bind(), std::runtime_error);
}
