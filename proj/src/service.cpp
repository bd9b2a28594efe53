#include "blendopt/service.hpp"

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "httplib.h"

#include "blendopt/errors.hpp"
#include "blendopt/io.hpp"
#include "blendopt/version.hpp"

namespace blendopt {
namespace {

using io::Json;
using Clock = std::chrono::steady_clock;

enum class JobStatus { Queued, Running, Done, Failed };

const char* status_name(JobStatus s) {
    switch (s) {
        case JobStatus::Queued: return "queued";
        case JobStatus::Running: return "running";
        case JobStatus::Done: return "done";
        case JobStatus::Failed: return "failed";
    }
    return "failed";
}

struct OptimizeRequest {
    SceneStructure scene;
    ObjectiveConfig config;
    AnnealSchedule schedule;
    PaletteOptions palette;
};

struct Job {
    std::string id;
    JobStatus status = JobStatus::Queued;
    std::shared_ptr<const OptimizeRequest> request;
    Json result;
    Json error;
    std::string trace_csv;
    Clock::time_point finished{};
};

// Request problems that map to a 400 response.
struct RequestError {
    int status = 400;
    std::string code;
    std::string message;
    std::string path;
};

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

Json error_body(const RequestError& e) {
    Json violations = Json::array();
    if (!e.path.empty() || e.status == 400) violations.push_back({{"path", e.path}, {"message", e.message}});
    return {{"error", {{"code", e.code}, {"message", e.message}, {"violations", violations}}}};
}

// Runs a handler body and converts library exceptions into error responses.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const ParseError& e) {
        send_json(res, 400, error_body({400, "invalid_request", e.what(), e.where()}));
    } catch (const ValidationError& e) {
        send_json(res, 400, error_body({400, "invalid_request", e.what(), ""}));
    } catch (const ContractViolation& e) {
        send_json(res, 400, error_body({400, "invalid_request", e.what(), ""}));
    } catch (const GenerationFailed& e) {
        send_json(res, 422, error_body({422, "generation_failed", e.what(), ""}));
    } catch (const std::exception& e) {
        send_json(res, 500, error_body({500, "internal", e.what(), ""}));
    }
}

Json parse_body(const httplib::Request& req) {
    Json j = io::parse_json(req.body, "body");
    if (!j.is_object()) throw ParseError("body", "expected a JSON object");
    return j;
}

const Json& member(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(key, "missing field");
    return *it;
}

Json member_or_null(const Json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? Json() : *it;
}

// Only inline histogram documents are accepted; mask layers would need
// server-side file access.
SceneStructure request_scene(const Json& body) {
    const Json& scene = member(body, "scene");
    if (!scene.is_object() || scene.value("format", "") != io::kHistogramFormat) {
        throw ParseError("scene.format", "the service accepts inline \"blendopt-histogram\" scenes only");
    }
    return io::scene_from_json(scene, ".", "scene");
}

}  // namespace

struct Service::Impl {
    std::shared_ptr<const NameModel> model;
    ServiceOptions options;
    httplib::Server server;
    int bound_port = -1;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> queue;
    std::map<std::string, Job> jobs;
    std::uint64_t next_id = 1;
    bool stopping = false;
    std::vector<std::jthread> workers;

    Impl(std::shared_ptr<const NameModel> m, ServiceOptions o) : model(std::move(m)), options(std::move(o)) {
        if (!model) throw ContractViolation("service needs a name model");
        if (options.workers == 0) options.workers = 1;
        // No SO_REUSEPORT: a second server on a busy port must fail to bind.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
        });
        routes();
        for (unsigned w = 0; w < options.workers; ++w) workers.emplace_back([this] { work(); });
    }

    ~Impl() {
        shutdown();
        workers.clear();
    }

    void shutdown() {
        {
            std::lock_guard lock(mu);
            stopping = true;
        }
        cv.notify_all();
        server.stop();
    }

    // Callers hold `mu`.
    void expire_locked() {
        const auto now = Clock::now();
        for (auto it = jobs.begin(); it != jobs.end();) {
            const bool finished = it->second.status == JobStatus::Done || it->second.status == JobStatus::Failed;
            if (finished && now - it->second.finished > options.job_ttl) {
                it = jobs.erase(it);
            } else {
                ++it;
            }
        }
    }

    void work() {
        for (;;) {
            std::string id;
            std::shared_ptr<const OptimizeRequest> request;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return stopping || !queue.empty(); });
                if (stopping) return;
                id = queue.front();
                queue.pop_front();
                auto it = jobs.find(id);
                if (it == jobs.end()) continue;
                it->second.status = JobStatus::Running;
                request = it->second.request;
            }

            Json result;
            Json error;
            std::string trace;
            try {
                const OptimizeResult r =
                    optimize(request->scene, *model, request->config, request->schedule, request->palette);
                const std::string doc = io::write_solution_document(request->scene, r.solution, r.breakdown,
                                                                    request->config, request->schedule, r.seed);
                result = {{"document", Json::parse(doc)},
                          {"solution", io::solution_to_json(r.solution)},
                          {"score", io::breakdown_to_json(request->scene, r.breakdown, request->config)},
                          {"trace_url", "/v1/jobs/" + id + "/trace"}};
                trace = r.trace.to_csv();
            } catch (const InfeasibleStart& e) {
                error = {{"code", "infeasible_start"}, {"message", e.what()}};
            } catch (const std::exception& e) {
                error = {{"code", "internal"}, {"message", e.what()}};
            }

            std::lock_guard lock(mu);
            auto it = jobs.find(id);
            if (it == jobs.end()) continue;
            Job& job = it->second;
            job.finished = Clock::now();
            job.request.reset();
            if (error.is_null()) {
                job.result = std::move(result);
                job.trace_csv = std::move(trace);
                job.status = JobStatus::Done;
            } else {
                job.error = std::move(error);
                job.status = JobStatus::Failed;
            }
        }
    }

    Json job_json(const Job& job) const {
        Json j = {{"job_id", job.id}, {"status", status_name(job.status)}};
        if (job.status == JobStatus::Done) j["result"] = job.result;
        if (job.status == JobStatus::Failed) j["error"] = job.error;
        return j;
    }

    void routes() {
        server.Get("/v1/healthz", [this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200,
                      {{"status", "ok"},
                       {"version", kVersion},
                       {"name_model", {{"bins", model->bin_count()}, {"terms", model->term_count()}}}});
        });

        server.Post("/v1/optimize", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const Json body = parse_body(req);
                auto request = std::make_shared<OptimizeRequest>();
                request->scene = request_scene(body);
                request->config = io::config_from_json(member_or_null(body, "config"), "config");
                request->schedule = io::schedule_from_json(member_or_null(body, "schedule"), "schedule");
                if (auto it = body.find("seed"); it != body.end()) {
                    if (!it->is_number_unsigned()) throw ParseError("seed", "expected a non-negative integer");
                    request->schedule.seed = it->get<std::uint64_t>();
                }
                request->palette =
                    io::palette_options_from_json(member_or_null(body, "palette"), request->scene.class_count, "palette");

                std::lock_guard lock(mu);
                expire_locked();
                if (queue.size() >= options.max_pending_jobs) {
                    send_json(res, 503, error_body({503, "queue_full", "too many pending jobs", ""}));
                    return;
                }
                char buf[32];
                std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(next_id++));
                Job job;
                job.id = buf;
                job.request = std::move(request);
                jobs.emplace(job.id, job);
                queue.push_back(job.id);
                cv.notify_one();
                res.set_header("Location", "/v1/jobs/" + job.id);
                send_json(res, 202, {{"job_id", job.id}, {"status", "queued"}});
            });
        });

        server.Get(R"(/v1/jobs/([A-Za-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu);
            expire_locked();
            auto it = jobs.find(req.matches[1].str());
            if (it == jobs.end()) {
                send_json(res, 404, error_body({404, "not_found", "unknown or expired job", ""}));
                return;
            }
            send_json(res, 200, job_json(it->second));
        });

        server.Get(R"(/v1/jobs/([A-Za-z0-9-]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu);
            expire_locked();
            auto it = jobs.find(req.matches[1].str());
            if (it == jobs.end() || it->second.status != JobStatus::Done) {
                send_json(res, 404, error_body({404, "not_found", "no trace for this job", ""}));
                return;
            }
            res.status = 200;
            res.set_content(it->second.trace_csv, "text/csv");
        });

        server.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const Json body = parse_body(req);
                const SceneStructure scene = request_scene(body);
                const ObjectiveConfig cfg = io::config_from_json(member_or_null(body, "config"), "config");
                const Solution sol = io::solution_from_json(member(body, "solution"), scene.class_count, "solution");
                const ScoreBreakdown b = total_score(scene, sol, cfg, *model);
                send_json(res, 200, {{"score", io::breakdown_to_json(scene, b, cfg)}});
            });
        });

        server.Post("/v1/stimuli", [](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const Json body = parse_body(req);
                const StimulusParams params = io::stimulus_params_from_json(body, "body");
                const Stimulus s = gen_stimulus(params);
                send_json(res, 200, {{"histogram", io::histogram_to_json(s.spec)}, {"kl", s.kl}});
            });
        });

        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "unhandled error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            send_json(res, 500, error_body({500, "internal", what, ""}));
        });
    }
};

Service::Service(std::shared_ptr<const NameModel> model, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(model), std::move(options))) {}

Service::~Service() = default;

int Service::bind() {
    auto& s = impl_->server;
    const int port = impl_->options.port == 0 ? s.bind_to_any_port(impl_->options.host)
                                              : (s.bind_to_port(impl_->options.host, impl_->options.port)
                                                     ? impl_->options.port
                                                     : -1);
    if (port < 0) {
        throw std::runtime_error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    impl_->bound_port = port;
    return port;
}

void Service::run() {
    if (impl_->bound_port < 0) throw std::logic_error("Service::run before bind");
    impl_->server.listen_after_bind();
}

void Service::stop() { impl_->shutdown(); }

}  // namespace blendopt
