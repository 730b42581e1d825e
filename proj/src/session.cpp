#include "xbadp/session.hpp"

#include <algorithm>
#include <chrono>

#include "xbadp/errors.hpp"

namespace xbadp {

using nlohmann::json;

namespace {

json explain_approx(const Instance& inst, const State& s, const ApproxEpoch& ep) {
    const auto& p = ep.program;
    const auto& sol = ep.solution;
    const bool simple = p.mode == ProgramMode::simple;
    int n_hld = 0;
    for (int c : sol.xb_choice) n_hld += c < 0;
    json xbs = json::array(), ots = json::array();
    for (std::size_t q = 0; q < p.xbs.size(); ++q) {
        const auto& e = p.xbs[q];
        const int c = sol.xb_choice[q];
        // holders see the recommended count; an assigned driver would be one more holder
        const double pos = c < 0 ? (n_hld - 1) / 2.0 : n_hld / 2.0;
        json row{{"driver", e.driver},
                 {"action", c < 0 ? "hold" : "assign"},
                 {"options", e.options.size()},
                 {"v_hld", e.v_hld},
                 {"slope", e.slope},
                 {"hold_value", simple ? e.v_hld : hold_value(e.v_hld, e.slope, pos)}};
        if (c >= 0) {
            const auto& o = e.options[c];
            row["pieces"] = o.pieces;
            row["immediate"] = o.immediate;
            row["future"] = o.future;
            row["value"] = o.value();
        }
        xbs.push_back(std::move(row));
    }
    for (std::size_t q = 0; q < p.ots.size(); ++q) {
        const auto& e = p.ots[q];
        const int c = sol.ot_choice[q];
        json row{{"driver", e.driver},
                 {"action", c < 0 ? "hold" : "assign"},
                 {"options", e.options.size()},
                 {"v_hld", e.v_hld},
                 {"slope", e.slope},
                 {"hold_value", simple ? e.v_hld : hold_value(e.v_hld, e.slope, n_hld)}};
        if (c >= 0) {
            row["piece"] = e.options[c].piece;
            row["immediate"] = e.options[c].net;
            row["surcharge"] = inst.pieces[e.options[c].piece].reward - e.options[c].net;
        }
        ots.push_back(std::move(row));
    }
    const double hold_all = evaluate_objective(p, std::vector<int>(p.xbs.size(), -1), std::vector<int>(p.ots.size(), -1));
    (void)s;
    return json{{"objective", sol.objective},
                {"hold_all_objective", hold_all},
                {"objective_delta", sol.objective - hold_all},
                {"deadline_hit", sol.deadline_hit},
                {"nodes", sol.nodes},
                {"solve_ms", ep.solve_ms},
                {"mode", simple ? "simple" : "oversupply"},
                {"xbs", xbs},
                {"ots", ots}};
}

double hours_of(const Instance& inst, const std::vector<int>& pieces) {
    double h = 0.0;
    for (int k : pieces) h += inst.pieces[k].duration * inst.period_hours();
    return h;
}

}  // namespace

json decisions_to_json(const Decisions& d) {
    json xb = json::array(), ot = json::array();
    for (const auto& [j, seq] : d.xb_assign) xb.push_back({{"driver", j}, {"pieces", seq}});
    for (const auto& [i, k] : d.ot_assign) ot.push_back({{"driver", i}, {"piece", k}});
    return {{"xb", xb}, {"ot", ot}};
}

Decisions decisions_from_json(const json& j) {
    Decisions d;
    try {
        if (!j.is_object()) throw SessionError(400, "bad_request", "decisions must be an object");
        for (const auto& [key, _] : j.items())
            if (key != "xb" && key != "ot") throw SessionError(400, "bad_request", "decisions: unknown key '" + key + "'");
        if (j.contains("xb"))
            for (const auto& x : j.at("xb")) {
                const int driver = x.at("driver").get<int>();
                auto pieces = x.at("pieces").get<std::vector<int>>();
                if (!d.xb_assign.emplace(driver, std::move(pieces)).second)
                    throw SessionError(422, "infeasible", "decisions: XB " + std::to_string(driver) + " listed twice",
                                       {"xb " + std::to_string(driver) + ": assigned twice"});
            }
        if (j.contains("ot"))
            for (const auto& x : j.at("ot")) {
                const int driver = x.at("driver").get<int>();
                if (!d.ot_assign.emplace(driver, x.at("piece").get<int>()).second)
                    throw SessionError(422, "infeasible", "decisions: OT " + std::to_string(driver) + " listed twice",
                                       {"ot " + std::to_string(driver) + ": assigned twice"});
            }
    } catch (const json::exception& e) {
        throw SessionError(400, "bad_request", std::string("decisions: ") + e.what());
    }
    return d;
}

Session::Session(std::string id, Instance inst, std::shared_ptr<const ValueArtifacts> artifacts, SessionOptions opts,
                 const std::vector<int>& initial_pieces)
    : id_(std::move(id)), inst_(std::move(inst)), hash_(instance_hash(inst_)), art_(std::move(artifacts)), opts_(opts) {
    switch (opts_.policy) {
        case PolicyKind::approx:
            if (!art_) throw SessionError(422, "no_artifacts", "approximate policy needs value artifacts");
            break;
        case PolicyKind::myopic_xb_first:
        case PolicyKind::myopic_ot_first: break;
        default:
            throw SessionError(400, "bad_policy", "sessions support approx, myopic_xb_first and myopic_ot_first");
    }
    if (art_) {
        try {
            check_artifacts(*art_, inst_, hash_);
        } catch (const ContractViolation& e) {
            throw SessionError(409, "artifact_mismatch", e.what());
        }
    }
    state_ = initial_state(inst_, {});
    metrics_.xb_productive_periods.assign(inst_.xbs.size(), 0);
    std::vector<int> first = initial_pieces;
    if (opts_.clock == ClockMode::auto_sample) {
        try {
            path_ = sample_path(inst_, opts_.seed, opts_.p_scale);
        } catch (const ContractViolation& e) {
            throw SessionError(400, "bad_request", e.what());
        }
        first.insert(first.end(), path_->at(0).begin(), path_->at(0).end());
    }
    std::sort(first.begin(), first.end());
    first.erase(std::unique(first.begin(), first.end()), first.end());
    check_reveal(first, 0);
    if (!first.empty()) {
        add_revealed(first);
        log_.push_back({SessionEvent::Kind::reveal, 0, first, {}, 0.0});
    }
}

void Session::require_open() const {
    if (closed_) throw SessionError(409, "session_closed", "session " + id_ + " is closed");
}

std::vector<int> Session::resolve(const std::vector<int>& pieces, const std::vector<int>& sources) const {
    std::vector<int> out;
    std::vector<std::string> bad;
    for (int k : pieces) {
        if (k < 0 || k >= static_cast<int>(inst_.pieces.size())) bad.push_back("piece " + std::to_string(k) + ": unknown");
        else out.push_back(k);
    }
    for (int h : sources) {
        if (h < 0 || h >= static_cast<int>(inst_.sources.size())) bad.push_back("source " + std::to_string(h) + ": unknown");
        else out.insert(out.end(), inst_.sources[h].piece_ids.begin(), inst_.sources[h].piece_ids.end());
    }
    if (!bad.empty()) throw SessionError(422, "unknown_id", "reveal names unknown ids", bad);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void Session::check_reveal(const std::vector<int>& pieces, Period earliest) const {
    std::vector<std::string> bad;
    for (int k : pieces) {
        if (k < 0 || k >= static_cast<int>(inst_.pieces.size())) bad.push_back("piece " + std::to_string(k) + ": unknown");
        else if (inst_.pieces[k].start < earliest && !revealed_.count(k))
            bad.push_back("piece " + std::to_string(k) + ": starts at " + std::to_string(inst_.pieces[k].start) +
                          ", before " + std::to_string(earliest));
    }
    if (!bad.empty()) throw SessionError(422, "past_start", "revealed work must start at or after " + std::to_string(earliest), bad);
}

void Session::add_revealed(const std::vector<int>& pieces) {
    for (int k : pieces) {
        revealed_.insert(k);
        metrics_.revealed_reward += inst_.pieces[k].reward;
        metrics_.revealed_hours += inst_.pieces[k].duration * inst_.period_hours();
    }
    state_.open.insert(state_.open.end(), pieces.begin(), pieces.end());
    std::sort(state_.open.begin(), state_.open.end());
}

json Session::reveal(const std::vector<int>& pieces) {
    require_open();
    check_reveal(pieces, state_.post ? state_.t + 1 : state_.t);
    std::vector<int> fresh;
    for (int k : pieces)
        if (!revealed_.count(k)) fresh.push_back(k);
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    if (!fresh.empty()) {
        add_revealed(fresh);
        log_.push_back({SessionEvent::Kind::reveal, state_.t, fresh, {}, 0.0});
        ++version_;
        pending_.reset();
    }
    return {{"revealed", fresh}, {"state", state_json()}};
}

json Session::recommend_now() const {
    if (state_.post) throw SessionError(422, "wrong_phase", "recommendations exist only before a commit");
    json out{{"t", state_.t}, {"version", version_}, {"policy", std::string(to_string(opts_.policy))}};
    Decisions d;
    if (opts_.policy == PolicyKind::approx) {
        auto ep = approx_epoch(inst_, state_, *art_, opts_.cfg);
        out["explanation"] = explain_approx(inst_, state_, ep);
        out["objective"] = ep.solution.objective;
        out["deadline_hit"] = ep.solution.deadline_hit;
        d = std::move(ep.decisions);
    } else {
        d = myopic_decide(inst_, state_,
                          opts_.policy == PolicyKind::myopic_xb_first ? MyopicMode::xb_first : MyopicMode::ot_first);
        out["deadline_hit"] = false;
    }
    const auto mode = opts_.policy == PolicyKind::approx ? DecisionMode::sequence : DecisionMode::plain;
    out["decisions"] = decisions_to_json(d);
    out["immediate_reward"] = reward(inst_, state_, d, mode);
    return out;
}

json Session::recommendation() {
    require_open();
    if (!pending_ || pending_->first != version_) pending_.emplace(version_, recommend_now());
    return pending_->second;
}

json Session::preview(const std::vector<int>& pieces) const {
    require_open();
    if (state_.post) throw SessionError(422, "wrong_phase", "previews exist only before a commit");
    check_reveal(pieces, state_.t);
    Session copy = *this;
    copy.reveal(pieces);
    json out = copy.recommend_now();
    out["version"] = version_;
    out["hypothetical"] = pieces;
    out["preview"] = true;
    return out;
}

json Session::commit(const Decisions& d) {
    require_open();
    if (state_.post) throw SessionError(422, "wrong_phase", "epoch " + std::to_string(state_.t) + " is already committed");
    // The myopic policies still commit through the sequence check; a one-piece list is a valid sequence.
    auto v = decision_violations(inst_, state_, d, DecisionMode::sequence);
    if (!v.empty()) throw SessionError(422, "infeasible", "decisions violate constraints", v);
    const double gained = reward(inst_, state_, d, DecisionMode::sequence);
    const auto covered = d.covered();
    std::vector<int> dropped;
    for (int k : now_pieces(inst_, state_))
        if (!std::binary_search(covered.begin(), covered.end(), k)) dropped.push_back(k);
    metrics_.commits += 1;
    metrics_.total_reward += gained;
    metrics_.ot_surcharge += ot_surcharge(inst_, d);
    for (int k : covered) metrics_.covered_reward += inst_.pieces[k].reward;
    metrics_.covered_hours += hours_of(inst_, covered);
    for (int k : dropped) metrics_.uncovered_reward += inst_.pieces[k].reward;
    metrics_.uncovered_hours += hours_of(inst_, dropped);
    for (const auto& [j, seq] : d.xb_assign)
        for (int k : seq) metrics_.xb_productive_periods[j] += inst_.pieces[k].duration;
    log_.push_back({SessionEvent::Kind::commit, state_.t, {}, d, gained});
    state_ = apply_decisions(inst_, state_, d, DecisionMode::sequence);
    ++version_;
    pending_.reset();
    return {{"reward", gained}, {"dropped", dropped}, {"state", state_json()}};
}

json Session::advance(const std::optional<std::vector<int>>& next) {
    require_open();
    if (!state_.post) throw SessionError(422, "wrong_phase", "commit epoch " + std::to_string(state_.t) + " before advancing");
    if (path_ && next) throw SessionError(422, "auto_clock", "auto-clock sessions sample their own arrivals");
    const Period t = state_.t;
    if (t + 1 >= inst_.T) {
        closed_ = true;
        log_.push_back({SessionEvent::Kind::advance, t, {}, {}, 0.0});
        ++version_;
        pending_.reset();
        return {{"closed", true}, {"metrics", metrics_json()}, {"state", state_json()}};
    }
    std::vector<int> w = path_ ? path_->at(t + 1) : *next;
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    check_reveal(w, t + 1);
    std::vector<int> fresh;
    for (int k : w)
        if (!revealed_.count(k)) fresh.push_back(k);
    for (int k : fresh) {
        revealed_.insert(k);
        metrics_.revealed_reward += inst_.pieces[k].reward;
        metrics_.revealed_hours += inst_.pieces[k].duration * inst_.period_hours();
    }
    state_ = apply_exogenous(inst_, state_, fresh);
    log_.push_back({SessionEvent::Kind::advance, t, fresh, {}, 0.0});
    ++version_;
    pending_.reset();
    return {{"closed", false}, {"revealed", fresh}, {"state", state_json()}};
}

json Session::state_json() const {
    json out{{"id", id_},
             {"version", version_},
             {"T", inst_.T},
             {"t", state_.t},
             {"phase", state_.post ? "post" : "pre"},
             {"closed", closed_},
             {"tau", state_.tau},
             {"phi", state_.phi},
             {"open", state_.open},
             {"instance_hash", hash_},
             {"clock", opts_.clock == ClockMode::manual ? "manual" : "auto"},
             {"policy", std::string(to_string(opts_.policy))}};
    if (!state_.post && !closed_) {
        out["now"] = now_pieces(inst_, state_);
        out["available_xbs"] = available_xbs(inst_, state_);
        out["available_ots"] = available_ots(inst_, state_);
    } else {
        out["now"] = json::array();
        out["available_xbs"] = json::array();
        out["available_ots"] = json::array();
    }
    return out;
}

json Session::values_json(std::optional<int> xb, std::optional<int> ot) const {
    if (!art_) throw SessionError(422, "no_artifacts", "session has no value artifacts");
    if (xb && (*xb < 0 || *xb >= static_cast<int>(inst_.xbs.size())))
        throw SessionError(404, "unknown_driver", "no XB " + std::to_string(*xb));
    if (ot && (*ot < 0 || *ot >= static_cast<int>(inst_.ots.size())))
        throw SessionError(404, "unknown_driver", "no OT " + std::to_string(*ot));
    const Period t = state_.t;
    json xbs = json::array(), ots = json::array();
    const bool all = !xb && !ot;
    for (const auto& j : inst_.xbs) {
        if (!all && (!xb || *xb != j.id)) continue;
        json row = json::array();
        for (Period tau = t + 1; tau <= j.end + 1; ++tau)
            row.push_back({{"tau", tau}, {"value", art_->xb_tables[j.id].at(tau, t)}});
        xbs.push_back({{"driver", j.id}, {"start", j.start}, {"end", j.end}, {"row", row}, {"slope", art_->xb_loss(j.id, t)}});
    }
    for (const auto& o : inst_.ots) {
        if (!all && (!ot || *ot != o.id)) continue;
        json row = json::array();
        for (int phi = 1; phi <= inst_.delta_ot + 1; ++phi) row.push_back({{"phi", phi}, {"value", art_->ot_tables[o.id].at(phi)}});
        ots.push_back({{"driver", o.id}, {"start", o.start}, {"row", row}, {"slope", art_->ot_loss(o.id, t)}});
    }
    return {{"t", t}, {"version", version_}, {"n_max", art_->n_max}, {"xbs", xbs}, {"ots", ots}};
}

json Session::metrics_json() const {
    double shift_hours = 0.0, xb_hours = 0.0;
    for (const auto& j : inst_.xbs) shift_hours += (j.end - j.start + 1) * inst_.period_hours();
    for (int p : metrics_.xb_productive_periods) xb_hours += p * inst_.period_hours();
    return {{"t", state_.t},
            {"version", version_},
            {"closed", closed_},
            {"commits", metrics_.commits},
            {"total_reward", metrics_.total_reward},
            {"covered_reward", metrics_.covered_reward},
            {"ot_surcharge", metrics_.ot_surcharge},
            {"covered_hours", metrics_.covered_hours},
            {"revealed_reward", metrics_.revealed_reward},
            {"revealed_hours", metrics_.revealed_hours},
            {"uncovered_reward", metrics_.uncovered_reward},
            {"uncovered_hours", metrics_.uncovered_hours},
            {"xb_productive_periods", metrics_.xb_productive_periods},
            {"utilization", shift_hours > 0.0 ? xb_hours / shift_hours : 0.0}};
}

json Session::log_json() const {
    json events = json::array();
    for (const auto& e : log_) {
        switch (e.kind) {
            case SessionEvent::Kind::reveal: events.push_back({{"kind", "reveal"}, {"t", e.t}, {"pieces", e.pieces}}); break;
            case SessionEvent::Kind::commit:
                events.push_back({{"kind", "commit"}, {"t", e.t}, {"decisions", decisions_to_json(e.decisions)}, {"reward", e.reward}});
                break;
            case SessionEvent::Kind::advance: events.push_back({{"kind", "advance"}, {"t", e.t}, {"pieces", e.pieces}}); break;
        }
    }
    return {{"id", id_}, {"version", version_}, {"instance_hash", hash_}, {"events", events}};
}

std::vector<SessionEvent> log_from_json(const json& j) {
    std::vector<SessionEvent> out;
    for (const auto& e : j.at("events")) {
        SessionEvent ev;
        const auto kind = e.at("kind").get<std::string>();
        ev.t = e.at("t").get<Period>();
        if (kind == "reveal" || kind == "advance") {
            ev.kind = kind == "reveal" ? SessionEvent::Kind::reveal : SessionEvent::Kind::advance;
            ev.pieces = e.at("pieces").get<std::vector<int>>();
        } else if (kind == "commit") {
            ev.kind = SessionEvent::Kind::commit;
            ev.decisions = decisions_from_json(e.at("decisions"));
            ev.reward = e.at("reward").get<double>();
        } else {
            throw ParseError("session log: unknown event kind '" + kind + "'");
        }
        out.push_back(std::move(ev));
    }
    return out;
}

State replay_log(const Instance& inst, const std::vector<SessionEvent>& log) {
    State s = initial_state(inst, {});
    for (const auto& e : log) {
        switch (e.kind) {
            case SessionEvent::Kind::reveal:
                s.open.insert(s.open.end(), e.pieces.begin(), e.pieces.end());
                std::sort(s.open.begin(), s.open.end());
                break;
            case SessionEvent::Kind::commit: s = apply_decisions(inst, s, e.decisions, DecisionMode::sequence); break;
            case SessionEvent::Kind::advance:
                if (s.t + 1 < inst.T) s = apply_exogenous(inst, s, e.pieces);
                break;
        }
    }
    return s;
}

}  // namespace xbadp
