#pragma once

#include <memory>
#include <string>

#include "titl/search.hpp"
#include "titl/service_config.hpp"
#include "titl/session_store.hpp"

namespace httplib {
class Server;
}

namespace titl {

// HTTP/JSON front end of a SearchEngine.
//
//   POST /api/sessions                 {query, k?, mode?, alpha?} -> 201 {session_id, results}
//   POST /api/sessions/{id}/feedback   {judgments:[{sentence_id, relevant}]} -> 200 {relevant_count, irrelevant_count}
//   POST /api/sessions/{id}/more       {} -> 200 {results}
//   GET  /api/sessions/{id}/export?format=txt|csv|json
//   GET  /api/health
//
// Errors are {"error": {"code", "message"}}.
class Service {
public:
    Service(std::shared_ptr<const SearchEngine> engine, ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds config.bind:config.port. Returns the port, or -1 on failure.
    int bind();
    // Binds config.bind on a free port chosen by the OS.
    int bind_any_port();
    // Serves until stop(); returns false if the server failed.
    bool listen();
    void stop();
    bool is_running() const;
    void wait_until_ready() const;

    // Loads sessions from config.snapshot_path. Returns a warning on problems.
    std::optional<std::string> restore_snapshot();
    // Writes all live sessions to config.snapshot_path. Returns an error
    // message instead of throwing; the service keeps running either way.
    std::optional<std::string> save_snapshot();

    SessionStore& sessions() { return sessions_; }
    const SearchEngine& engine() const { return *engine_; }
    const ServiceConfig& config() const { return config_; }

private:
    void install_routes();

    std::shared_ptr<const SearchEngine> engine_;
    ServiceConfig config_;
    SessionStore sessions_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace titl
