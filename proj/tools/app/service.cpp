#include "service.hpp"

#include "workspace.hpp"

#include <httplib.h>

#include <atomic>
#include <map>
#include <mutex>
#include <random>
#include <thread>

namespace vlc::app {

namespace {

using io::json;
using Clock = std::chrono::steady_clock;

struct Snapshot {
    io::SceneDocument doc;
    std::string scene_hash;
    manip::ChangeLog log; // edits that produced this snapshot from the previous one
};

struct Job {
    std::string status = "running";
    int http_status = 0;
    json body;
};

struct Session {
    std::string id;
    std::string path;
    scale::ScaleConfig config;
    std::string config_hash;

    std::mutex mu;
    std::atomic<bool> busy{false};
    std::vector<Snapshot> history;
    std::map<std::string, json> reports; // scene hash -> report document
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::size_t job_counter = 0;
    Clock::time_point touched = Clock::now();
};

std::string random_token() {
    static std::mutex mu;
    static std::random_device rd;
    static std::mt19937_64 gen(rd());
    std::lock_guard lock(mu);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                  static_cast<unsigned long long>(gen()));
    return buf;
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::string& pointer = {}) {
    json body = {{"error", code}, {"message", message}};
    if (!pointer.empty()) {
        body["pointer"] = pointer;
    }
    send(res, status, body);
}

void send_error(httplib::Response& res, const Error& e) {
    send_error(res, http_status(e), to_string(e.code()), e.what(), e.pointer());
}

json parse_body(const httplib::Request& req) {
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::ParseError, "request body is not valid JSON", "");
    }
    return j;
}

// Caller holds s.mu.
const json& report_of(Session& s, const Snapshot& snap) {
    auto it = s.reports.find(snap.scene_hash);
    if (it == s.reports.end()) {
        const auto report = identify(snap.doc, s.path, s.config);
        const io::Provenance prov{s.config_hash, snap.scene_hash, std::string(io::kToolVersion), {}};
        it = s.reports.emplace(snap.scene_hash, io::report_document(report, prov)).first;
    }
    return it->second;
}

} // namespace

struct Service::Impl {
    ServiceOptions options;
    httplib::Server server;

    std::mutex sessions_mu;
    std::map<std::string, std::shared_ptr<Session>> sessions;

    std::mutex workers_mu;
    std::vector<std::jthread> workers;

    explicit Impl(ServiceOptions o) : options(std::move(o)) { routes(); }

    ~Impl() {
        server.stop();
        std::lock_guard lock(workers_mu);
        for (auto& w : workers) {
            w.request_stop();
        }
        workers.clear(); // joins
    }

    void evict() {
        const auto now = Clock::now();
        std::lock_guard lock(sessions_mu);
        for (auto it = sessions.begin(); it != sessions.end();) {
            const auto& s = it->second;
            bool idle = false;
            {
                std::lock_guard slock(s->mu);
                idle = !s->busy && now - s->touched > options.session_ttl;
            }
            it = idle ? sessions.erase(it) : std::next(it);
        }
    }

    std::shared_ptr<Session> find(const httplib::Request& req, httplib::Response& res) {
        evict();
        const std::string id = req.matches[1];
        std::shared_ptr<Session> s;
        {
            std::lock_guard lock(sessions_mu);
            if (auto it = sessions.find(id); it != sessions.end()) {
                s = it->second;
            }
        }
        if (!s) {
            send_error(res, 404, "not_found", "unknown session '" + id + "'");
            return nullptr;
        }
        std::lock_guard slock(s->mu);
        s->touched = Clock::now();
        return s;
    }

    void create(const httplib::Request& req, httplib::Response& res) {
        evict();
        try {
            const json body = parse_body(req);
            if (!body.is_object()) {
                throw Error(ErrorCode::ParseError, "expected an object", "");
            }
            if (!body.contains("scene")) {
                throw Error(ErrorCode::ParseError, "/scene: required field is missing", "/scene");
            }
            if (!body.contains("path") || !body["path"].is_string()) {
                throw Error(ErrorCode::ParseError, "/path: expected a path name", "/path");
            }
            auto s = std::make_shared<Session>();
            s->id = random_token();
            s->path = body["path"].get<std::string>();
            s->config = body.contains("config") ? io::config_from_json(body["config"]) : options.default_config;
            s->config_hash = io::config_hash(s->config);
            io::SceneDocument doc = io::scene_from_json(body["scene"]);
            (void)doc.path(s->path);
            const std::string hash = io::scene_hash(doc);
            s->history.push_back({std::move(doc), hash, {}});
            json out;
            {
                std::lock_guard slock(s->mu);
                out = {{"session_id", s->id}, {"report", report_of(*s, s->history.back())}};
            }
            {
                std::lock_guard lock(sessions_mu);
                sessions.emplace(s->id, s);
            }
            send(res, 201, out);
        } catch (const Error& e) {
            send_error(res, e);
        }
    }

    void report(const httplib::Request& req, httplib::Response& res) {
        auto s = find(req, res);
        if (!s) {
            return;
        }
        try {
            std::lock_guard lock(s->mu);
            send(res, 200, report_of(*s, s->history.back()));
        } catch (const Error& e) {
            send_error(res, e);
        }
    }

    void scene(const httplib::Request& req, httplib::Response& res) {
        auto s = find(req, res);
        if (!s) {
            return;
        }
        std::lock_guard lock(s->mu);
        send(res, 200, io::to_json(s->history.back().doc));
    }

    void undo(const httplib::Request& req, httplib::Response& res) {
        auto s = find(req, res);
        if (!s) {
            return;
        }
        if (s->busy) {
            send_error(res, 409, "conflict", "a manipulation is in flight for this session");
            return;
        }
        std::lock_guard lock(s->mu);
        if (s->history.size() <= 1) {
            send_error(res, 409, "conflict", "nothing to undo");
            return;
        }
        s->history.pop_back();
        const auto& top = s->history.back();
        send(res, 200, {{"report", report_of(*s, top)}, {"scene", io::to_json(top.doc)}});
    }

    // Runs on the request thread (sync) or a worker (async); clears busy.
    std::pair<int, json> run(const std::shared_ptr<Session>& s, const io::AnyRequest& request, Snapshot base,
                             std::stop_token stop) {
        std::pair<int, json> out;
        try {
            if (options.on_manipulate_start) {
                options.on_manipulate_start();
            }
            const auto initial = morphology_of(base.doc, s->path);
            const auto result = std::visit(
                [&](const auto& r) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(r)>, manip::SegmentRequest>) {
                        return manip::manipulate_segment(initial, r, s->config, stop);
                    } else {
                        return manip::manipulate(initial, r, s->config, stop);
                    }
                },
                request);
            Snapshot next{with_morphology(base.doc, s->path, result.morphology), {}, result.log};
            next.scene_hash = io::scene_hash(next.doc);

            std::lock_guard lock(s->mu);
            const json before = report_of(*s, base);
            const io::Provenance prov{s->config_hash, next.scene_hash, std::string(io::kToolVersion), {}};
            const json after = io::report_document(result.after, prov);
            s->reports.insert_or_assign(next.scene_hash, after);
            json body = io::to_json(result);
            body.erase("path");
            body["before"] = before;
            body["after"] = after;
            body["scene"] = io::to_json(next.doc);
            body["scene_hash"] = next.scene_hash;
            s->history.push_back(std::move(next));
            out = {200, std::move(body)};
        } catch (const Error& e) {
            json body = {{"error", to_string(e.code())}, {"message", e.what()}};
            out = {http_status(e), std::move(body)};
        } catch (const std::exception& e) {
            out = {500, json{{"error", "internal"}, {"message", e.what()}}};
        }
        s->busy = false;
        return out;
    }

    void manipulate(const httplib::Request& req, httplib::Response& res) {
        auto s = find(req, res);
        if (!s) {
            return;
        }
        io::AnyRequest request;
        try {
            request = io::request_from_json(parse_body(req));
        } catch (const Error& e) {
            send_error(res, e);
            return;
        }
        if (s->busy.exchange(true)) {
            send_error(res, 409, "conflict", "a manipulation is already in flight for this session");
            return;
        }
        Snapshot base;
        {
            std::lock_guard lock(s->mu);
            base = s->history.back();
        }
        const std::size_t budget = std::visit([](const auto& r) { return r.budget; }, request);
        if (budget <= options.sync_budget_limit) {
            auto [status, body] = run(s, request, std::move(base), {});
            send(res, status, body);
            return;
        }

        auto job = std::make_shared<Job>();
        std::string job_id;
        {
            std::lock_guard lock(s->mu);
            job_id = std::to_string(++s->job_counter);
            s->jobs.emplace(job_id, job);
        }
        {
            std::lock_guard lock(workers_mu);
            workers.emplace_back([this, s, job, request, base = std::move(base)](std::stop_token stop) mutable {
                auto [status, body] = run(s, request, std::move(base), stop);
                std::lock_guard lock(s->mu);
                job->status = status == 200 ? "done" : "failed";
                job->http_status = status;
                job->body = std::move(body);
            });
        }
        send(res, 202, {{"job_id", job_id}, {"poll", "/api/sessions/" + s->id + "/jobs/" + job_id}});
    }

    void job(const httplib::Request& req, httplib::Response& res) {
        auto s = find(req, res);
        if (!s) {
            return;
        }
        std::lock_guard lock(s->mu);
        auto it = s->jobs.find(req.matches[2]);
        if (it == s->jobs.end()) {
            send_error(res, 404, "not_found", "unknown job");
            return;
        }
        const Job& j = *it->second;
        json body = {{"status", j.status}};
        if (j.status != "running") {
            body["http_status"] = j.http_status;
            body[j.status == "done" ? "result" : "error"] = j.body;
        }
        send(res, 200, body);
    }

    void routes() {
        if (!options.cors_origin.empty()) {
            server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                        {"Access-Control-Allow-Headers", "Content-Type"}});
            server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        }
        server.Post("/api/sessions", [this](const auto& req, auto& res) { create(req, res); });
        server.Get(R"(/api/sessions/([^/]+)/report)", [this](const auto& req, auto& res) { report(req, res); });
        server.Get(R"(/api/sessions/([^/]+)/scene)", [this](const auto& req, auto& res) { scene(req, res); });
        server.Post(R"(/api/sessions/([^/]+)/undo)", [this](const auto& req, auto& res) { undo(req, res); });
        server.Post(R"(/api/sessions/([^/]+)/manipulate)",
                    [this](const auto& req, auto& res) { manipulate(req, res); });
        server.Get(R"(/api/sessions/([^/]+)/jobs/([^/]+))", [this](const auto& req, auto& res) { job(req, res); });
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                send_error(res, res.status, res.status == 404 ? "not_found" : "http_error", "no such route");
            }
        });
    }
};

Service::Service(ServiceOptions options) : m_impl(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

bool Service::listen(const std::string& host, int port) {
    return m_impl->server.listen(host, port);
}

int Service::bind_any_port(const std::string& host) {
    return m_impl->server.bind_to_any_port(host);
}

bool Service::listen_after_bind() {
    return m_impl->server.listen_after_bind();
}

void Service::stop() {
    m_impl->server.stop();
}

httplib::Server& Service::server() {
    return m_impl->server;
}

} // namespace vlc::app
