#pragma once

// HTTP binding for Service. JSON in, JSON out; errors are
// {"error": {code, message, details}} with a status per error class.

#include <atomic>
#include <charconv>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rambler/service.hpp"
#include "rambler/sse.hpp"

namespace rambler::http {

using nlohmann::json;

inline constexpr const char* kRevisionHeader = "X-Doc-Revision";

inline int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::Conflict: return 409;
        case ErrorCode::InvalidState: return 422;
        case ErrorCode::BackendFailure: return 502;
        case ErrorCode::BadRequest: return 400;
    }
    return 500;
}

inline json error_body(ErrorCode code, const std::string& message, const std::vector<std::string>& details = {}) {
    return {{"error", {{"code", to_string(code)}, {"message", message}, {"details", details}}}};
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline json body_of(const httplib::Request& req) {
    if (text::trim(req.body).empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
}

inline std::uint64_t revision_of(const httplib::Request& req) {
    if (!req.has_header(kRevisionHeader)) fail(ErrorCode::BadRequest, "missing X-Doc-Revision header");
    auto v = req.get_header_value(kRevisionHeader);
    std::uint64_t rev = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), rev);
    if (ec != std::errc{} || p != v.data() + v.size()) fail(ErrorCode::BadRequest, "X-Doc-Revision must be an integer");
    return rev;
}

template <class T>
T field(const json& body, const char* key) {
    if (!body.contains(key)) fail(ErrorCode::BadRequest, std::string("missing field '") + key + "'");
    try {
        return body[key].get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::BadRequest, std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
std::optional<T> optional_field(const json& body, const char* key) {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    return field<T>(body, key);
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_json(res, status_for(e.code()), error_body(e.code(), e.what(), e.details()));
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", {{"code", "Internal"}, {"message", e.what()}, {"details", json::array()}}}});
        }
    };
}

}  // namespace detail

/// Registers every endpoint on `server`. `service` must outlive it.
inline void mount(httplib::Server& server, Service& service) {
    using detail::field;
    using detail::guarded;
    using detail::optional_field;
    using detail::revision_of;
    using detail::send_json;
    const std::string doc = R"(/documents/([^/]+))";
    const std::string ramble = doc + R"(/rambles/([^/]+))";

    server.Post("/documents", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        auto out = service.create_document(body.value("title", std::string{}));
        send_json(res, 201, out);
    }));

    server.Get(doc, guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service.get_document(req.matches[1]));
    }));

    server.Post(doc + "/rambles", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        auto idx = optional_field<std::size_t>(body, "insert_index");
        send_json(res, 201, service.create_ramble(req.matches[1], revision_of(req), idx));
    }));

    server.Post(ramble + "/finalize", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        send_json(res, 200, service.finalize(req.matches[1], req.matches[2], revision_of(req), field<std::string>(body, "raw_text")));
    }));

    server.Post(ramble + "/respeak", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        auto action = field<std::string>(body, "action");
        auto rev = revision_of(req);
        if (action == "begin") return send_json(res, 200, service.respeak_begin(req.matches[1], req.matches[2], rev));
        if (action != "commit") fail(ErrorCode::BadRequest, "action must be begin or commit");
        auto mode = require_respeak_action(field<std::string>(body, "mode"));
        auto new_text = optional_field<std::string>(body, "new_text").value_or("");
        send_json(res, 200, service.respeak_commit(req.matches[1], req.matches[2], rev, mode, new_text));
    }));

    server.Post(ramble + "/split", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        auto mode = field<std::string>(body, "mode");
        auto rev = revision_of(req);
        if (mode == "manual")
            return send_json(res, 200, service.split_manual(req.matches[1], req.matches[2], rev, field<std::size_t>(body, "boundary")));
        if (mode != "semantic") fail(ErrorCode::BadRequest, "mode must be manual or semantic");
        send_json(res, 200, service.split_semantic(req.matches[1], req.matches[2], rev));
    }));

    server.Post(doc + "/merge", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        auto ids = field<std::vector<std::string>>(body, "ramble_ids");
        auto mode = optional_field<std::string>(body, "mode").value_or("manual");
        if (mode != "manual" && mode != "semantic") fail(ErrorCode::BadRequest, "mode must be manual or semantic");
        send_json(res, 200, service.merge(req.matches[1], ids, revision_of(req), mode == "semantic"));
    }));

    server.Post(doc + "/reorder", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        send_json(res, 200, service.reorder(req.matches[1], field<std::string>(body, "ramble_id"),
                                            field<std::size_t>(body, "new_index"), revision_of(req)));
    }));

    server.Delete(ramble, guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service.delete_ramble(req.matches[1], req.matches[2], revision_of(req)));
    }));

    server.Post(ramble + "/keywords", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        send_json(res, 200, service.toggle_keyword(req.matches[1], req.matches[2], revision_of(req), field<std::string>(body, "word")));
    }));

    server.Post(ramble + "/regenerate", guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service.regenerate(req.matches[1], req.matches[2], revision_of(req)));
    }));

    server.Post(ramble + "/transform", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto body = detail::body_of(req);
        auto out = service.transform_propose(req.matches[1], req.matches[2], revision_of(req), field<std::string>(body, "prompt"),
                                             optional_field<bool>(body, "include_keywords").value_or(false),
                                             optional_field<bool>(body, "auto_accept").value_or(false));
        send_json(res, 200, out);
    }));

    server.Post(ramble + R"(/transform/([^/]+)/accept)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service.transform_accept(req.matches[1], req.matches[2], req.matches[3], revision_of(req)));
    }));

    server.Get(ramble + "/summary", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto level = require_zoom_level(req.get_param_value("level"));
        if (level == ZoomLevel::Full) fail(ErrorCode::BadRequest, "level must be half, quarter or gist");
        std::string doc_id = req.matches[1];
        std::string ramble_id = req.matches[2];
        service.get_document(doc_id);  // 404 before the stream starts
        if (!service.store().snapshot(doc_id).find(ramble_id))
            fail(ErrorCode::NotFound, "no ramble with id " + ramble_id, {ramble_id});
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [&service, doc_id, ramble_id, level](std::size_t, httplib::DataSink& sink) {
            auto emit = [&](const std::string& event, const json& data) {
                auto frame = sse::format(event, data.dump());
                return sink.write(frame.data(), frame.size());
            };
            try {
                service.stream_summary(doc_id, ramble_id, level, emit);
            } catch (const Error& e) {
                emit("error", {{"code", to_string(e.code())}, {"message", e.what()}});
            }
            sink.done();
            return true;
        });
    }));

    server.Get(doc + "/export", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto level = req.has_param("level") ? require_zoom_level(req.get_param_value("level")) : ZoomLevel::Full;
        res.status = 200;
        res.set_content(service.export_text(req.matches[1], level), "text/plain; charset=utf-8");
    }));
}

/// A server bound to a port, running on its own thread.
class Server {
public:
    explicit Server(Service& service) { mount(server_, service); }
    ~Server() { stop(); }

    /// Binds (port 0 picks a free one) and starts serving; returns the port.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (port_ < 0) fail(ErrorCode::BadRequest, "cannot bind " + host + ":" + std::to_string(port));
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    /// Serves on the calling thread until stop().
    void run(const std::string& host, int port) {
        if (!server_.listen(host, port)) fail(ErrorCode::BadRequest, "cannot listen on " + host + ":" + std::to_string(port));
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    int port() const { return port_; }
    httplib::Server& raw() { return server_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = -1;
};

}  // namespace rambler::http
