#include "titl/service.hpp"

#include <algorithm>
#include <iostream>

#include <httplib.h>

namespace titl {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, status, json{{"error", {{"code", code}, {"message", message}}}});
}

json results_json(const std::vector<SearchResult>& batch) {
    auto arr = json::array();
    for (const auto& r : batch)
        arr.push_back({{"id", r.sentence_id}, {"text", r.text}, {"score", r.score}, {"rank", r.rank}});
    return arr;
}

// Parses a request body as a JSON object; an empty body counts as {}.
std::optional<json> parse_object(const httplib::Request& req, httplib::Response& res) {
    if (req.body.empty()) return json::object();
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        send_error(res, 400, "bad_request", "request body must be a JSON object");
        return std::nullopt;
    }
    return body;
}

}  // namespace

Service::Service(std::shared_ptr<const SearchEngine> engine, ServiceConfig config)
    : engine_(std::move(engine)),
      config_(std::move(config)),
      sessions_(config_.session_ttl),
      server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

Service::~Service() { stop(); }

void Service::install_routes() {
    auto& svr = *server_;

    svr.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (config_.cors_origins.empty()) return;
        const auto origin = req.get_header_value("Origin");
        const auto& allowed = config_.cors_origins;
        if (std::find(allowed.begin(), allowed.end(), "*") != allowed.end()) {
            res.set_header("Access-Control-Allow-Origin", "*");
        } else if (!origin.empty() && std::find(allowed.begin(), allowed.end(), origin) != allowed.end()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
        } else {
            return;
        }
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Access-Control-Expose-Headers", "Content-Disposition");
    });
    svr.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    svr.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200,
                  json{{"status", "ok"},
                       {"corpus_sentences", engine_->index().size()},
                       {"dim", engine_->model().dim()}});
    });

    svr.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_object(req, res);
        if (!body) return;

        const auto q = body->find("query");
        if (q == body->end() || !q->is_string()) {
            send_error(res, 400, "bad_request", "'query' must be a string");
            return;
        }
        std::size_t k = config_.default_k;
        if (auto it = body->find("k"); it != body->end()) {
            if (!it->is_number_integer() || it->get<long long>() < 1) {
                send_error(res, 400, "bad_request", "'k' must be an integer >= 1");
                return;
            }
            k = it->get<std::size_t>();
        }
        double alpha = config_.default_alpha;
        if (auto it = body->find("alpha"); it != body->end()) {
            if (!it->is_number() || !(it->get<double>() >= 0.0 && it->get<double>() <= 1.0)) {
                send_error(res, 400, "bad_request", "'alpha' must be a number in [0, 1]");
                return;
            }
            alpha = it->get<double>();
        }
        std::string mode_name = config_.default_mode;
        if (auto it = body->find("mode"); it != body->end()) {
            if (!it->is_string()) {
                send_error(res, 400, "bad_request", "'mode' must be a string");
                return;
            }
            mode_name = it->get<std::string>();
        }
        SearchMode mode;
        try {
            mode = SearchMode::parse(mode_name, alpha);
        } catch (const ValidationError& e) {
            send_error(res, 422, "unknown_mode", e.what());
            return;
        }

        Session session;
        try {
            session = engine_->create_session(q->get<std::string>(), mode, k);
        } catch (const Error& e) {
            send_error(res, 400, "bad_request", e.what());
            return;
        }
        sessions_.evict_expired();
        const auto batch = engine_->next_results(session);
        const auto id = session.session_id;
        sessions_.insert(std::move(session));
        send_json(res, 201, json{{"session_id", id}, {"results", results_json(batch)}});
    });

    svr.Post(R"(/api/sessions/([^/]+)/feedback)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        auto body = parse_object(req, res);
        if (!body) return;

        std::vector<std::pair<std::uint64_t, bool>> judgments;
        const auto js = body->find("judgments");
        if (js == body->end() || !js->is_array()) {
            send_error(res, 400, "bad_request", "'judgments' must be an array");
            return;
        }
        for (const auto& j : *js) {
            if (!j.is_object() || !j.contains("sentence_id") || !j["sentence_id"].is_number_unsigned() ||
                !j.contains("relevant") || !j["relevant"].is_boolean()) {
                send_error(res, 400, "bad_request",
                           "each judgment needs a non-negative integer 'sentence_id' and a boolean 'relevant'");
                return;
            }
            judgments.emplace_back(j["sentence_id"].get<std::uint64_t>(), j["relevant"].get<bool>());
        }

        std::optional<std::uint64_t> unshown;
        auto counts = sessions_.with_session(id, [&](Session& s) {
            // All-or-nothing: validate every judgment before applying any.
            for (const auto& [sid, rel] : judgments)
                if (!s.shown.contains(sid)) {
                    unshown = sid;
                    return std::pair<std::size_t, std::size_t>{0, 0};
                }
            for (const auto& [sid, rel] : judgments) engine_->record_feedback(s, sid, rel);
            return std::pair{s.relevant.size(), s.irrelevant.size()};
        });
        if (!counts) {
            send_error(res, 404, "not_found", "unknown session '" + id + "'");
        } else if (unshown) {
            send_error(res, 409, "not_shown",
                       "sentence " + std::to_string(*unshown) + " was not shown in this session");
        } else {
            send_json(res, 200, json{{"relevant_count", counts->first}, {"irrelevant_count", counts->second}});
        }
    });

    svr.Post(R"(/api/sessions/([^/]+)/more)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        auto batch = sessions_.with_session(id, [&](Session& s) { return engine_->next_results(s); });
        if (!batch) {
            send_error(res, 404, "not_found", "unknown session '" + id + "'");
            return;
        }
        send_json(res, 200, json{{"results", results_json(*batch)}});
    });

    svr.Get(R"(/api/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        ExportFormat format = ExportFormat::txt;
        if (req.has_param("format")) {
            try {
                format = parse_export_format(req.get_param_value("format"));
            } catch (const ValidationError& e) {
                send_error(res, 400, "bad_format", e.what());
                return;
            }
        }
        auto doc = sessions_.with_session(id, [&](Session& s) { return engine_->export_document(s, format); });
        if (!doc) {
            send_error(res, 404, "not_found", "unknown session '" + id + "'");
            return;
        }
        res.status = 200;
        res.set_header("Content-Disposition", "attachment; filename=\"titl-export-" + id + "." +
                                                  std::string(file_extension(format)) + "\"");
        res.set_content(*doc, std::string(content_type(format)));
    });

    svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string msg = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            msg = e.what();
        } catch (...) {
        }
        send_error(res, 500, "internal", msg);
    });
}

int Service::bind() {
    return server_->bind_to_port(config_.bind, config_.port) ? config_.port : -1;
}

int Service::bind_any_port() { return server_->bind_to_any_port(config_.bind); }

bool Service::listen() { return server_->listen_after_bind(); }

void Service::stop() {
    if (server_) server_->stop();
}

bool Service::is_running() const { return server_->is_running(); }

void Service::wait_until_ready() const { server_->wait_until_ready(); }

std::optional<std::string> Service::restore_snapshot() {
    if (!config_.snapshot_path) return std::nullopt;
    auto loaded = read_snapshot(*config_.snapshot_path, engine_->index().size());
    sessions_.clear();
    for (auto& s : loaded.sessions) {
        s.query_tokens = tokenize(s.query_text, engine_->tokenizer_config());
        sessions_.insert(std::move(s));
    }
    return loaded.warning;
}

std::optional<std::string> Service::save_snapshot() {
    if (!config_.snapshot_path) return std::nullopt;
    try {
        write_snapshot(*config_.snapshot_path, sessions_.copy_all(), engine_->index().size());
    } catch (const std::exception& e) {
        return std::string(e.what());
    }
    return std::nullopt;
}

}  // namespace titl
