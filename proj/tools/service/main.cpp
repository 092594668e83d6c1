#include "service.hpp"
#include "workspace.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <pthread.h>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"HTTP session service for interactive identify / manipulate", "vlc-service"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::string> config_path;
    std::size_t ttl_minutes = 120;
    vlc::app::ServiceOptions options;
    app.add_option("--host", host, "Listen address");
    app.add_option("--port", port, "Listen port");
    app.add_option("--cors-origin", options.cors_origin, "Value for Access-Control-Allow-Origin");
    app.add_option("--config", config_path, "Default scale config (default: $VLC_CONFIG, then built-in)");
    app.add_option("--sync-budget", options.sync_budget_limit, "Largest budget served synchronously");
    app.add_option("--ttl-minutes", ttl_minutes, "Idle session lifetime");
    CLI11_PARSE(app, argc, argv);

    try {
        options.default_config = vlc::app::resolve_config(config_path);
    } catch (const vlc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return vlc::app::exit_code(e.code());
    }
    options.session_ttl = std::chrono::minutes(ttl_minutes);

    // Signals are taken by a dedicated thread so shutdown runs outside a handler.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    vlc::app::Service service(std::move(options));
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        service.stop();
    });

    std::cerr << "listening on " << host << ":" << port << "\n";
    const bool ok = service.listen(host, port);
    if (!ok) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        pthread_kill(waiter.native_handle(), SIGTERM);
    }
    waiter.join();
    return ok ? 0 : 1;
}
