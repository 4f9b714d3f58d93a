#include "foldbox/error.hpp"
#include "foldbox/service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace foldbox {

namespace {

void cors(httplib::Response& res)
{
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
}

} // namespace

void mount(httplib::Server& server, Service& service, const std::optional<std::string>& ui_dir)
{
    if (ui_dir) {
        server.set_mount_point("/ui", *ui_dir);
    }
    const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        const auto r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
        cors(res);
    };
    server.Get(R"(/sessions.*)", forward);
    server.Post(R"(/sessions.*)", forward);
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        cors(res);
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) {
            const nlohmann::json body{{"error", "NotFound"}, {"message", "no route for " + req.path}};
            res.set_content(body.dump(), "application/json");
        }
        cors(res);
    });
}

int serve(Service& service, const std::string& host, int port, const std::optional<std::string>& ui_dir)
{
    httplib::Server server;
    mount(server, service, ui_dir);
    if (!server.listen(host, port)) {
        throw UsageError("cannot listen on " + host + ":" + std::to_string(port));
    }
    return 0;
}

} // namespace foldbox
