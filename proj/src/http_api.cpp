#include "semchain/http_api.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include "semchain/atomic_file.hpp"

namespace semchain {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
    send_json(res, status, {{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) throw ServiceError(ServiceError::Code::bad_request, "request body is empty");
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        throw ServiceError(ServiceError::Code::bad_request, "request body must be a JSON object");
    }
    return body;
}

std::string required_string(const json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end() || !it->is_string()) {
        throw ServiceError(ServiceError::Code::bad_request, fmt::format("'{}' must be a string", key));
    }
    return it->get<std::string>();
}

// Token from the query string, the JSON body or the X-Session-Token header.
std::string token_of(const httplib::Request& req, const json* body = nullptr) {
    if (body && body->contains("token")) return required_string(*body, "token");
    if (req.has_param("token")) return req.get_param_value("token");
    if (req.has_header("X-Session-Token")) return req.get_header_value("X-Session-Token");
    throw ServiceError(ServiceError::Code::bad_request, "missing session token");
}

json observation_payload(Orchestrator& orch, const std::string& token, const Observation& obs) {
    json out{{"observation", to_json(obs)}};
    if (orch.reveals_max_score(token)) out["max_score"] = orch.max_score(token);
    return out;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps exceptions to {code, message} responses.
Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        try {
            inner(req, res);
        } catch (const ServiceError& e) {
            send_error(res, http_status(e.code()), to_string(e.code()), e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const std::invalid_argument& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

}  // namespace

void mount_api(httplib::Server& server, Orchestrator& orch) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type, X-Session-Token"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/experiments", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
                    const auto plan = parse_body(req).get<ExperimentPlan>();
                    const auto id = orch.create_experiment(plan);
                    send_json(res, 201, {{"plan_id", id}, {"game_ids", orch.game_ids(id)}});
                }));

    server.Post("/join", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
                    const auto body = parse_body(req);
                    std::optional<std::string> plan_id;
                    if (body.contains("plan_id")) plan_id = required_string(body, "plan_id");
                    const auto joined = orch.join(required_string(body, "participant_id"), plan_id);
                    const auto& token = joined.session.token;
                    json out{{"token", token}, {"round", joined.session.round}};
                    if (joined.observation) {
                        out.update(observation_payload(orch, token, *joined.observation));
                        out["advice_due"] = false;
                    } else {
                        out["observation"] = nullptr;
                        out["advice_due"] = true;
                    }
                    send_json(res, 200, out);
                }));

    server.Get("/observation", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
                   const auto token = token_of(req);
                   send_json(res, 200, observation_payload(orch, token, orch.observation(token)));
               }));

    server.Post("/guess", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
                    const auto body = parse_body(req);
                    const auto token = token_of(req, &body);
                    std::optional<std::size_t> turn;
                    if (body.contains("turn")) turn = body.at("turn").get<std::size_t>();
                    const auto r = orch.post_guess(token, required_string(body, "guess"), turn);
                    json out{{"score", r.score},
                             {"round_complete", r.round_complete},
                             {"advice_due", r.advice_due},
                             {"finished", r.finished},
                             {"observation", r.observation ? to_json(*r.observation) : json(nullptr)}};
                    send_json(res, 200, out);
                }));

    server.Post("/advice", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
                    const auto body = parse_body(req);
                    orch.post_advice(token_of(req, &body), required_string(body, "advice"));
                    send_json(res, 200, {{"ok", true}});
                }));

    server.Get("/progress", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
                   if (!req.has_param("plan_id")) throw ServiceError(ServiceError::Code::bad_request, "missing plan_id");
                   send_json(res, 200, orch.progress(req.get_param_value("plan_id")));
               }));

    server.Get(R"(/logs/([A-Za-z0-9_.\-]+))", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
                   res.status = 200;
                   res.set_content(orch.game_log(req.matches[1]), "application/x-ndjson");
               }));

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"ok", true}}); });
}

ApiServer::ApiServer(Orchestrator& orchestrator) : server_(std::make_unique<httplib::Server>()) {
    mount_api(*server_, orchestrator);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw IoError(fmt::format("cannot bind {}:{}", host, port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void ApiServer::run(const std::string& host, int port) {
    if (!server_->listen(host, port)) throw IoError(fmt::format("cannot listen on {}:{}", host, port));
}

void ApiServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace semchain
