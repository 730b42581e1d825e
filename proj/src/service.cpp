#include "xbadp/service.hpp"

#include <httplib.h>

#include "xbadp/errors.hpp"

namespace xbadp {

using nlohmann::json;

namespace {

ServiceResponse error_response(int status, const std::string& code, const std::string& message,
                               const std::vector<std::string>& details = {}) {
    return {status, json{{"code", code}, {"message", message}, {"details", details}}.dump()};
}

ServiceResponse ok(int status, const json& body) { return {status, body.dump()}; }

json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw SessionError(400, "bad_request", "request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw SessionError(400, "bad_request", std::string("malformed JSON: ") + e.what());
    }
}

std::vector<int> int_list(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    try {
        return j.at(key).get<std::vector<int>>();
    } catch (const json::exception&) {
        throw SessionError(400, "bad_request", std::string("'") + key + "' must be a list of integers");
    }
}

long long required_version(const json& j) {
    if (!j.contains("version")) throw SessionError(400, "missing_version", "mutating requests must carry 'version'");
    if (!j.at("version").is_number_integer()) throw SessionError(400, "bad_request", "'version' must be an integer");
    return j.at("version").get<long long>();
}

std::optional<int> query_int(const std::map<std::string, std::string>& q, const std::string& key) {
    auto it = q.find(key);
    if (it == q.end()) return std::nullopt;
    try {
        std::size_t used = 0;
        int v = std::stoi(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw SessionError(400, "bad_request", "query parameter '" + key + "' must be an integer");
    }
}

PolicyConfig policy_config_from_json(const json& j, PolicyConfig cfg) {
    for (const auto& [key, v] : j.items()) {
        if (key == "l_max") cfg.l_max = v.get<int>();
        else if (key == "prune_dominated") cfg.prune_dominated = v.get<bool>();
        else if (key == "mode") {
            const auto m = v.get<std::string>();
            if (m == "simple") cfg.mode = ProgramMode::simple;
            else if (m == "oversupply") cfg.mode = ProgramMode::oversupply;
            else throw SessionError(400, "bad_request", "policy_config.mode must be simple or oversupply");
        } else if (key == "overrule_p") cfg.overrule_p = v.get<double>();
        else if (key == "deadline_ms") {
            if (v.is_null()) cfg.deadline_ms.reset();
            else cfg.deadline_ms = v.get<double>();
        } else throw SessionError(400, "bad_request", "policy_config: unknown key '" + key + "'");
    }
    if (cfg.l_max < 1) throw SessionError(400, "bad_request", "policy_config.l_max must be at least 1");
    return cfg;
}

}  // namespace

/// Mutations lock `mutex`; reads of state, metrics and log copy the published snapshot pointer, which never
/// waits on a mutation in progress.
struct DispatchService::Slot {
    std::mutex mutex;
    std::unique_ptr<Session> session;
    mutable std::mutex snap_mutex;
    std::shared_ptr<const json> snap;

    std::shared_ptr<const json> snapshot() const {
        std::lock_guard lock(snap_mutex);
        return snap;
    }

    void publish() {
        auto next = std::make_shared<json>();
        (*next)["state"] = session->state_json();
        (*next)["metrics"] = session->metrics_json();
        (*next)["log"] = session->log_json();
        std::lock_guard lock(snap_mutex);
        snap = std::move(next);
    }
};

DispatchService::DispatchService(ServiceOptions opts) : opts_(opts) {}
DispatchService::~DispatchService() = default;

std::size_t DispatchService::session_count() const {
    std::shared_lock lock(map_mutex_);
    return sessions_.size();
}

std::shared_ptr<DispatchService::Slot> DispatchService::find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError(404, "unknown_session", "no session '" + id + "'");
    return it->second;
}

ServiceResponse DispatchService::create(const std::string& body) {
    const json req = parse_body(body);
    static const std::set<std::string> known{"schedule", "artifacts", "policy", "policy_config", "clock",
                                             "seed", "p_scale", "initial_reveal", "train_losses"};
    for (const auto& [key, _] : req.items())
        if (!known.count(key)) throw SessionError(400, "bad_request", "unknown key '" + key + "'");
    if (!req.contains("schedule")) throw SessionError(400, "invalid_schedule", "missing 'schedule'");

    Instance inst;
    try {
        const auto& s = req.at("schedule");
        inst = load_schedule(s.is_string() ? s.get<std::string>() : s.dump());
    } catch (const ValidationError& e) {
        throw SessionError(400, "invalid_schedule", "schedule failed validation", e.violations());
    } catch (const ParseError& e) {
        throw SessionError(400, "invalid_schedule", "schedule could not be parsed", {e.what()});
    }

    SessionOptions opts;
    try {
        if (req.contains("policy")) opts.policy = parse_policy(req.at("policy").get<std::string>());
        if (req.contains("policy_config")) opts.cfg = policy_config_from_json(req.at("policy_config"), opts.cfg);
        if (req.contains("clock")) {
            const auto c = req.at("clock").get<std::string>();
            if (c == "manual") opts.clock = ClockMode::manual;
            else if (c == "auto") opts.clock = ClockMode::auto_sample;
            else throw SessionError(400, "bad_request", "clock must be manual or auto");
        }
        if (req.contains("seed")) opts.seed = req.at("seed").get<std::uint64_t>();
        if (req.contains("p_scale")) opts.p_scale = req.at("p_scale").get<double>();
    } catch (const json::exception& e) {
        throw SessionError(400, "bad_request", e.what());
    } catch (const ParseError& e) {
        throw SessionError(400, "bad_policy", e.what());
    }

    std::shared_ptr<const ValueArtifacts> art;
    if (req.contains("artifacts")) {
        try {
            const auto& a = req.at("artifacts");
            art = std::make_shared<ValueArtifacts>(load_artifacts(a.is_string() ? a.get<std::string>() : a.dump()));
        } catch (const ParseError& e) {
            throw SessionError(400, "invalid_artifacts", "artifacts could not be parsed", {e.what()});
        }
    } else if (opts.policy == PolicyKind::approx) {
        TrainOptions t = opts_.train;
        if (req.contains("train_losses")) t.train_losses = req.at("train_losses").get<bool>();
        art = std::make_shared<ValueArtifacts>(train_artifacts(inst, t));
    }

    std::vector<int> initial;
    auto slot = std::make_shared<Slot>();
    const std::string id = "s" + std::to_string(next_id_++);
    {
        // resolve needs the instance; build with no reveal, then recreate with the resolved set
        Session probe(id, inst, art, opts);
        if (req.contains("initial_reveal")) {
            const auto& r = req.at("initial_reveal");
            initial = probe.resolve(int_list(r, "pieces"), int_list(r, "sources"));
        }
    }
    slot->session = std::make_unique<Session>(id, std::move(inst), art, opts, initial);
    slot->publish();
    {
        std::unique_lock lock(map_mutex_);
        sessions_.emplace(id, slot);
    }
    return ok(201, {{"id", id}, {"version", slot->session->version()}, {"instance_hash", slot->session->hash()},
                    {"state", slot->session->state_json()}});
}

ServiceResponse DispatchService::dispatch(const std::string& method, const std::string& id, const std::string& action,
                                          const std::string& body, const std::map<std::string, std::string>& query) {
    auto slot = find(id);
    if (method == "GET") {
        if (action == "state" || action == "metrics" || action == "log") {
            auto snap = slot->snapshot();
            return ok(200, snap->at(action));
        }
        if (action == "values") {
            std::lock_guard lock(slot->mutex);
            return ok(200, slot->session->values_json(query_int(query, "xb"), query_int(query, "ot")));
        }
        if (action == "recommendation") {
            std::lock_guard lock(slot->mutex);
            return ok(200, slot->session->recommendation());
        }
        throw SessionError(404, "not_found", "no route GET /sessions/{id}/" + action);
    }
    if (method != "POST") throw SessionError(405, "method_not_allowed", method + " is not supported");

    const json req = parse_body(body);
    if (action == "preview") {
        std::lock_guard lock(slot->mutex);
        const auto& s = *slot->session;
        return ok(200, s.preview(s.resolve(int_list(req, "pieces"), int_list(req, "sources"))));
    }
    const long long version = required_version(req);
    std::lock_guard lock(slot->mutex);
    auto& s = *slot->session;
    if (version != s.version())
        throw SessionError(409, "version_conflict", "stale version",
                           {"sent " + std::to_string(version) + ", current " + std::to_string(s.version())});
    json out;
    if (action == "open-work") {
        out = s.reveal(s.resolve(int_list(req, "pieces"), int_list(req, "sources")));
    } else if (action == "commit") {
        if (!req.contains("decisions")) throw SessionError(400, "bad_request", "missing 'decisions'");
        out = s.commit(decisions_from_json(req.at("decisions")));
    } else if (action == "advance") {
        std::optional<std::vector<int>> next;
        if (req.contains("pieces") || req.contains("sources"))
            next = s.resolve(int_list(req, "pieces"), int_list(req, "sources"));
        out = s.advance(next);
    } else {
        throw SessionError(404, "not_found", "no route POST /sessions/{id}/" + action);
    }
    out["version"] = s.version();
    slot->publish();
    return ok(200, out);
}

ServiceResponse DispatchService::handle(const std::string& method, const std::string& path, const std::string& body,
                                        const std::map<std::string, std::string>& query) {
    try {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : path) {
            if (c == '/') {
                if (!cur.empty()) parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) parts.push_back(cur);
        if (parts.empty() || parts[0] != "sessions") return error_response(404, "not_found", "no route " + path);
        if (parts.size() == 1) {
            if (method != "POST") return error_response(405, "method_not_allowed", "use POST /sessions");
            return create(body);
        }
        if (parts.size() != 3) return error_response(404, "not_found", "no route " + path);
        return dispatch(method, parts[1], parts[2], body, query);
    } catch (const SessionError& e) {
        return error_response(e.status(), e.code(), e.what(), e.details());
    } catch (const ValidationError& e) {
        return error_response(422, "invalid", e.what(), e.violations());
    } catch (const ContractViolation& e) {
        return error_response(422, "contract_violation", e.what());
    } catch (const json::exception& e) {
        return error_response(400, "bad_request", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

void DispatchService::mount(httplib::Server& server) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query[k] = v;
        auto r = handle(req.method, req.path, req.body, query);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server.Post("/sessions", route);
    server.Get(R"(/sessions/[^/]+/[a-z-]+)", route);
    server.Post(R"(/sessions/[^/]+/[a-z-]+)", route);
}

void serve(DispatchService& service, const std::string& host, int port) {
    httplib::Server server;
    service.mount(server);
    if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace xbadp
