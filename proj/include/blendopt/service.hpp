#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

#include "blendopt/name_model.hpp"

namespace blendopt {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    /// 0 picks an ephemeral port.
    int port = 8080;
    unsigned workers = 2;
    std::chrono::seconds job_ttl{3600};
    std::size_t max_pending_jobs = 256;
};

/// HTTP front end over the optimizer:
///   POST /v1/optimize, GET /v1/jobs/{id}, GET /v1/jobs/{id}/trace,
///   POST /v1/score, POST /v1/stimuli, GET /v1/healthz.
class Service {
public:
    Service(std::shared_ptr<const NameModel> model, ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket and returns the bound port. Throws
    /// std::runtime_error when the address is unavailable.
    int bind();
    /// Serves until stop() is called. Requires bind().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace blendopt
