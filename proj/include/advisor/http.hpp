#pragma once

#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "advisor/service.hpp"

namespace advisor {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

inline int status_of(ServiceError::Kind k) {
    switch (k) {
        case ServiceError::Kind::UnknownSession: return 404;
        case ServiceError::Kind::ClosedSession: return 410;
        case ServiceError::Kind::Busy: return 409;
        case ServiceError::Kind::BadRequest: return 400;
        case ServiceError::Kind::Storage: return 500;
    }
    return 500;
}

/// Runs `fn`, mapping service failures to HTTP statuses.
template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const ServiceError& e) {
        send_error(res, status_of(e.kind()), e.what());
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, std::string("malformed request body: ") + e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object())
        throw ServiceError(ServiceError::Kind::BadRequest, "request body must be a JSON object");
    return body;
}

inline std::string string_field(const nlohmann::json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string())
        throw ServiceError(ServiceError::Kind::BadRequest, std::string("missing string field '") + key + "'");
    return body[key].get<std::string>();
}

}  // namespace detail

/// Registers the JSON routes of `service` on `server`:
///
///   POST   /api/sessions                  {user_id} -> 201 {session_id, prompt, move, item, terminal}
///   POST   /api/sessions/{id}/utterances  {text}    -> 200 {move, prompt, item, terminal[, outcome]}
///   GET    /api/sessions/{id}                       -> 200 state snapshot
///   DELETE /api/sessions/{id}                       -> 204, counted as QUIT
///   GET    /api/users/{id}/model                    -> 200 stored model file
///
/// Errors carry {error}: 400 malformed input, 404 unknown session or user, 409 session
/// busy, 410 session closed, 500 storage failure.
inline void install_routes(httplib::Server& server, SessionService& service) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    server.Post("/api/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            const auto body = detail::parse_body(req);
            Opened o = service.create_session(detail::string_field(body, "user_id"));
            nlohmann::json j = o.first.to_json();
            j["session_id"] = o.session_id;
            detail::send_json(res, 201, j);
        });
    });

    server.Post(R"(/api/sessions/([0-9a-f]+)/utterances)", [&service](const httplib::Request& req,
                                                                      httplib::Response& res) {
        detail::guarded(res, [&] {
            const auto body = detail::parse_body(req);
            Reply r = service.post_utterance(req.matches[1], detail::string_field(body, "text"));
            detail::send_json(res, 200, r.to_json());
        });
    });

    server.Get(R"(/api/sessions/([0-9a-f]+))", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] { detail::send_json(res, 200, service.get_state(req.matches[1])); });
    });

    server.Delete(R"(/api/sessions/([0-9a-f]+))", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            service.close_session(req.matches[1]);
            res.status = 204;
        });
    });

    server.Get(R"(/api/users/([^/]+)/model)", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            auto raw = service.get_user_model(req.matches[1]);
            if (!raw) return detail::send_error(res, 404, "no stored model for user");
            res.status = 200;
            res.set_content(*raw, "application/json");
        });
    });
}

}  // namespace advisor
