#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

namespace httplib {
class Server;
}

namespace foldbox {

struct ServiceResponse {
    int status = 200;
    std::string body;
};

struct Session;

/// Transport-independent core of the HTTP API. Every request is a method, a
/// path and a JSON body; every response a status and a JSON body.
class Service {
public:
    /// With a log path, every mutation is appended as one JSON line and
    /// recover() rebuilds the sessions from it.
    explicit Service(std::optional<std::string> log_path = std::nullopt);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body);

    /// Replays the log file; returns the number of events applied.
    std::size_t recover();
    std::size_t session_count() const;

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    void append_log(const std::string& line);

    ServiceResponse create(const std::string& body, bool logged);
    ServiceResponse state(const std::string& id);
    ServiceResponse fire(const std::string& id, const std::string& body, bool logged);
    ServiceResponse undo(const std::string& id, bool logged);
    ServiceResponse history(const std::string& id);
    ServiceResponse analysis(const std::string& id);
    ServiceResponse run(const std::string& id, const std::string& body);
    ServiceResponse legalize(const std::string& id, const std::string& body);

    std::optional<std::string> log_path_;
    std::mutex log_mutex_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

/// Routes every request of `server` to `service`, with permissive CORS.
/// When `ui_dir` is set its files are served under /ui.
void mount(httplib::Server& server, Service& service, const std::optional<std::string>& ui_dir = std::nullopt);

/// Blocks serving on host:port.
int serve(Service& service, const std::string& host, int port, const std::optional<std::string>& ui_dir = std::nullopt);

} // namespace foldbox
