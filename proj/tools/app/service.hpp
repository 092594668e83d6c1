#pragma once

#include "vlc/io.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace vlc::app {

struct ServiceOptions {
    std::string cors_origin; // empty = no CORS headers
    // Requests above this many evaluations run in the background (202 + poll).
    std::size_t sync_budget_limit = 20000;
    std::chrono::seconds session_ttl{2 * 60 * 60};
    scale::ScaleConfig default_config;
    // Called on the worker right before a manipulation starts; tests use it to
    // hold a run open.
    std::function<void()> on_manipulate_start;
};

// HTTP session service. Routes:
//   POST /api/sessions                      {scene, path, config?} -> 201 {session_id, report}
//   GET  /api/sessions/{id}/report
//   POST /api/sessions/{id}/manipulate      request JSON -> 200 result | 202 {job_id, poll}
//   GET  /api/sessions/{id}/jobs/{job}
//   POST /api/sessions/{id}/undo
//   GET  /api/sessions/{id}/scene
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Blocking.
    bool listen(const std::string& host, int port);
    // Returns the bound port; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();

    httplib::Server& server();

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

} // namespace vlc::app
