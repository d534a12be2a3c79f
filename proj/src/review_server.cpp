#include "mutsum/review_server.hpp"

#include <httplib.h>

#include <mutex>

#include "mutsum/error.hpp"
#include "mutsum/review.hpp"

namespace mutsum {

using nlohmann::json;

namespace {

class NotFound : public Error {
public:
    explicit NotFound(const std::string& m) : Error("not_found", m) {}
};

int status_for(const std::string& code) {
    if (code == "review_error" || code == "config_error" || code == "bad_request") return 400;
    if (code == "not_found") return 404;
    if (code == "phase_violation") return 409;
    if (code == "stats_error" || code == "integrity_error") return 422;
    return 500;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
    send_json(res, json{{"error", {{"code", code}, {"message", message}}}}, status_for(code));
}

bool flag(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return false;
    const std::string v = req.get_param_value(name);
    return v == "1" || v == "true" || v == "yes";
}

std::string required_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name) || req.get_param_value(name).empty())
        throw ReviewError(std::string("missing query parameter '") + name + "'");
    return req.get_param_value(name);
}

json parse_body(const httplib::Request& req) {
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw ReviewError("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ReviewError(std::string("malformed JSON body: ") + e.what());
    }
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception&) {
        throw ReviewError(std::string("field '") + key + "' has the wrong type");
    }
}

std::optional<FailureMode> failure_mode_field(const json& j) {
    const std::string s = field<std::string>(j, "failure_mode", "");
    if (s.empty()) return std::nullopt;
    return parse_failure_mode(s);
}

}  // namespace

struct ReviewServer::Impl {
    CampaignStore& store;
    httplib::Server server;
    std::mutex mu;

    explicit Impl(CampaignStore& s) : store(s) {}

    /// Runs `fn` under the campaign mutex, mapping errors to JSON replies.
    template <typename Fn>
    void guarded(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
        std::lock_guard<std::mutex> lock(mu);
        try {
            if (req.matches.size() > 1 && req.matches[1] != store.id())
                throw NotFound("unknown campaign " + std::string(req.matches[1]));
            fn();
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const std::exception& e) {
            send_error(res, "internal_error", e.what());
        }
    }

    void routes() {
        server.Get("/campaigns", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] {
                const Progress p = progress(store);
                send_json(res, json::array({{{"id", store.id()},
                                             {"phase", to_string(store.phase())},
                                             {"mutants", p.mutants},
                                             {"raters", store.raters()}}}));
            });
        });
        server.Get(R"(/campaigns/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] {
                const std::string rater = required_param(req, "rater");
                if (auto item = next_pending(store, rater, flag(req, "blind"))) {
                    send_json(res, json{{"done", false}, {"item", to_json(*item)}});
                } else {
                    const Progress p = progress(store);
                    std::size_t judged = 0;
                    for (const auto& r : p.raters)
                        if (r.rater == rater) judged = r.judged;
                    send_json(res, json{{"done", true}, {"judged", judged}, {"total", p.mutants}});
                }
            });
        });
        server.Post(R"(/campaigns/([^/]+)/verdicts)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] {
                const json body = parse_body(req);
                Verdict v;
                v.mutant_id = field<std::string>(body, "mutant_id", "");
                v.rater_id = field<std::string>(body, "rater_id", "");
                v.label = parse_label(field<std::string>(body, "label", ""));
                v.failure_mode = failure_mode_field(body);
                v.recognized_as_bug = field<bool>(body, "recognized_as_bug", false);
                v.note = field<std::string>(body, "note", "");
                send_json(res, json{{"verdict", to_json(submit_verdict(store, v))}}, 201);
            });
        });
        server.Get(R"(/campaigns/([^/]+)/agreement)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] {
                send_json(res, agreement(store, required_param(req, "a"), required_param(req, "b")).to_json());
            });
        });
        server.Post(R"(/campaigns/([^/]+)/reconcile)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] {
                const json body = parse_body(req);
                if (field<bool>(body, "auto", false)) {
                    const AutoReconcileResult r = auto_reconcile(store);
                    send_json(res, json{{"written", r.written},
                                        {"disagreements", r.disagreements},
                                        {"incomplete", r.incomplete},
                                        {"phase", to_string(store.phase())}});
                    return;
                }
                ReconcileRequest r;
                r.mutant_id = field<std::string>(body, "mutant_id", "");
                r.label = parse_label(field<std::string>(body, "label", ""));
                r.failure_mode = failure_mode_field(body);
                r.recognized_as_bug = field<bool>(body, "recognized_as_bug", false);
                r.resolver_id = field<std::string>(body, "resolver_id", "");
                r.note = field<std::string>(body, "note", "");
                r.force = field<bool>(body, "force", false);
                send_json(res, json{{"reconciled", to_json(reconcile(store, r))}});
            });
        });
        server.Get(R"(/campaigns/([^/]+)/progress)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] { send_json(res, progress(store).to_json()); });
        });
    }
};

ReviewServer::ReviewServer(CampaignStore& store, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store)) {
    impl_->routes();
    if (static_dir && !impl_->server.set_mount_point("/", static_dir->string()))
        throw ConfigError("static UI directory not found: " + static_dir->string());
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
    if (impl_) impl_->server.stop();
}

void ReviewServer::wait_until_ready() { impl_->server.wait_until_ready(); }

}  // namespace mutsum
