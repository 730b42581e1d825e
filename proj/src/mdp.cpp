#include "xbadp/mdp.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "xbadp/rng.hpp"

namespace xbadp {

std::vector<int> Decisions::covered() const {
    std::vector<int> out;
    for (const auto& [j, seq] : xb_assign) out.insert(out.end(), seq.begin(), seq.end());
    for (const auto& [i, k] : ot_assign) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
}

const std::vector<int>& SamplePath::at(Period t) const {
    static const std::vector<int> none;
    if (t < 0 || t >= static_cast<Period>(reveals.size())) return none;
    return reveals[t];
}

State initial_state(const Instance& inst, const std::vector<int>& revealed_at_zero) {
    State s;
    s.t = 0;
    for (const auto& j : inst.xbs) s.tau.push_back(j.start);
    s.phi.assign(inst.ots.size(), 0);
    s.open = revealed_at_zero;
    std::sort(s.open.begin(), s.open.end());
    s.open.erase(std::unique(s.open.begin(), s.open.end()), s.open.end());
    for (int k : s.open)
        if (k < 0 || k >= static_cast<int>(inst.pieces.size()))
            throw ContractViolation("initial_state: unknown piece " + std::to_string(k));
    return s;
}

bool xb_available(const Instance& inst, const State& s, int j) noexcept {
    const auto& xb = inst.xbs[j];
    return xb.start <= s.t && s.t <= xb.end && s.tau[j] == s.t;
}

bool ot_available(const Instance& inst, const State& s, int i) noexcept {
    const auto& ot = inst.ots[i];
    return ot.start <= s.t && s.t <= ot.start + inst.delta_ot && s.phi[i] <= inst.delta_ot;
}

std::vector<int> available_xbs(const Instance& inst, const State& s) {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(inst.xbs.size()); ++j)
        if (xb_available(inst, s, j)) out.push_back(j);
    return out;
}

std::vector<int> available_ots(const Instance& inst, const State& s) {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(inst.ots.size()); ++i)
        if (ot_available(inst, s, i)) out.push_back(i);
    return out;
}

std::vector<int> now_pieces(const Instance& inst, const State& s) {
    std::vector<int> out;
    for (int k : s.open)
        if (inst.pieces[k].start == s.t) out.push_back(k);
    return out;
}

std::vector<std::string> decision_violations(const Instance& inst, const State& s, const Decisions& d,
                                             DecisionMode mode) {
    std::vector<std::string> v;
    const std::set<int> open(s.open.begin(), s.open.end());
    std::set<int> used;
    auto claim = [&](int k, const std::string& who) {
        if (!open.count(k)) {
            v.push_back(who + ": piece " + std::to_string(k) + " is not open");
            return false;
        }
        if (!used.insert(k).second) v.push_back("piece " + std::to_string(k) + ": assigned more than once");
        if (mode == DecisionMode::plain && inst.pieces[k].start != s.t)
            v.push_back(who + ": piece " + std::to_string(k) + " does not start now");
        return true;
    };
    if (s.post) v.push_back("state: already post-decision");

    for (const auto& [j, seq] : d.xb_assign) {
        const std::string who = "xb " + std::to_string(j);
        if (j < 0 || j >= static_cast<int>(inst.xbs.size())) {
            v.push_back(who + ": unknown");
            continue;
        }
        if (!xb_available(inst, s, j)) v.push_back(who + ": not available");
        if (seq.empty()) v.push_back(who + ": empty sequence");
        if (mode == DecisionMode::plain && seq.size() > 1) v.push_back(who + ": sequence longer than one piece");
        for (std::size_t r = 0; r < seq.size(); ++r) {
            const int k = seq[r];
            if (k < 0 || k >= static_cast<int>(inst.pieces.size())) {
                v.push_back(who + ": unknown piece " + std::to_string(k));
                continue;
            }
            if (!claim(k, who)) continue;
            if (!xb_eligible(inst.xbs[j], inst.pieces[k])) v.push_back(who + ": piece " + std::to_string(k) + " not eligible");
            if (r > 0 && seq[r - 1] >= 0 && seq[r - 1] < static_cast<int>(inst.pieces.size()) &&
                inst.pieces[seq[r - 1]].last() >= inst.pieces[k].start)
                v.push_back(who + ": sequence pieces overlap or are unsorted");
        }
    }
    for (const auto& [i, k] : d.ot_assign) {
        const std::string who = "ot " + std::to_string(i);
        if (i < 0 || i >= static_cast<int>(inst.ots.size())) {
            v.push_back(who + ": unknown");
            continue;
        }
        if (!ot_available(inst, s, i)) v.push_back(who + ": not available");
        if (k < 0 || k >= static_cast<int>(inst.pieces.size())) {
            v.push_back(who + ": unknown piece " + std::to_string(k));
            continue;
        }
        if (!claim(k, who)) continue;
        if (!ot_eligible(inst.ots[i], inst.pieces[k], inst.delta_ot))
            v.push_back(who + ": piece " + std::to_string(k) + " not eligible");
    }
    return v;
}

bool decision_feasible(const Instance& inst, const State& s, const Decisions& d, DecisionMode mode) {
    return decision_violations(inst, s, d, mode).empty();
}

namespace {

void require_feasible(const Instance& inst, const State& s, const Decisions& d, DecisionMode mode, const char* op) {
    auto v = decision_violations(inst, s, d, mode);
    if (v.empty()) return;
    std::string msg = std::string(op) + ": infeasible decisions";
    for (const auto& line : v) msg += "; " + line;
    throw ContractViolation(msg);
}

}  // namespace

double ot_surcharge(const Instance& inst, const Decisions& d) {
    double total = 0.0;
    for (const auto& [i, k] : d.ot_assign) total += inst.c_ot * ot_overrun(inst.ots[i], inst.pieces[k], inst.delta_ot);
    return total;
}

double reward(const Instance& inst, const State& s, const Decisions& d, DecisionMode mode) {
    require_feasible(inst, s, d, mode, "reward");
    double total = 0.0;
    for (int k : d.covered()) total += inst.pieces[k].reward;
    return total - ot_surcharge(inst, d);
}

State apply_decisions(const Instance& inst, const State& s, const Decisions& d, DecisionMode mode) {
    require_feasible(inst, s, d, mode, "apply_decisions");
    State out = s;
    out.post = true;
    for (int j = 0; j < static_cast<int>(inst.xbs.size()); ++j) {
        if (!xb_available(inst, s, j)) continue;
        auto it = d.xb_assign.find(j);
        out.tau[j] = it == d.xb_assign.end() ? s.tau[j] + 1 : inst.pieces[it->second.back()].last() + 1;
    }
    for (int i = 0; i < static_cast<int>(inst.ots.size()); ++i) {
        if (!ot_available(inst, s, i)) continue;
        out.phi[i] = d.ot_assign.count(i) ? inst.delta_ot + 1 : s.phi[i] + 1;
    }
    const auto covered = d.covered();
    std::vector<int> keep;
    for (int k : s.open)
        if (inst.pieces[k].start != s.t && !std::binary_search(covered.begin(), covered.end(), k)) keep.push_back(k);
    out.open = std::move(keep);
    return out;
}

State apply_exogenous(const Instance& inst, const State& post, const std::vector<int>& revealed_next) {
    if (!post.post) throw ContractViolation("apply_exogenous: state is not post-decision");
    State out = post;
    out.post = false;
    out.t = post.t + 1;
    for (int k : revealed_next) {
        if (k < 0 || k >= static_cast<int>(inst.pieces.size()))
            throw ContractViolation("apply_exogenous: unknown piece " + std::to_string(k));
        if (inst.pieces[k].start < out.t)
            throw ContractViolation("apply_exogenous: piece " + std::to_string(k) + " starts in the past");
        if (std::binary_search(post.open.begin(), post.open.end(), k))
            throw ContractViolation("apply_exogenous: piece " + std::to_string(k) + " already revealed");
        out.open.push_back(k);
    }
    std::sort(out.open.begin(), out.open.end());
    if (std::adjacent_find(out.open.begin(), out.open.end()) != out.open.end())
        throw ContractViolation("apply_exogenous: duplicate piece in reveal set");
    return out;
}

SamplePath path_from_sources(const Instance& inst, std::vector<int> open_sources, std::uint64_t seed) {
    SamplePath path;
    path.seed = seed;
    std::sort(open_sources.begin(), open_sources.end());
    path.open_sources = std::move(open_sources);
    path.reveals.assign(std::max(inst.T, 0), {});
    for (int h : path.open_sources) {
        if (h < 0 || h >= static_cast<int>(inst.sources.size()))
            throw ContractViolation("sample path: unknown source " + std::to_string(h));
        const Period a = inst.source_start(h);
        for (int k : inst.sources[h].piece_ids) path.reveals[a].push_back(k);
    }
    for (auto& r : path.reveals) std::sort(r.begin(), r.end());
    return path;
}

SamplePath sample_path(const Instance& inst, std::uint64_t seed, double p_scale) {
    Rng rng(seed);
    std::vector<int> open;
    for (const auto& h : inst.sources) {
        const double p = h.p * p_scale;
        if (p > 1.0 + 1e-12)
            throw ContractViolation("sample path: scaled probability of source " + std::to_string(h.id) + " exceeds 1");
        if (rng.bernoulli(p)) open.push_back(h.id);
    }
    return path_from_sources(inst, std::move(open), seed);
}

std::string path_to_json(const SamplePath& path) {
    nlohmann::json j{{"seed", path.seed}, {"open_sources", path.open_sources}};
    return j.dump();
}

SamplePath path_from_json(const Instance& inst, std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.begin(), text.end());
        return path_from_sources(inst, j.at("open_sources").get<std::vector<int>>(), j.at("seed").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("sample path: ") + e.what());
    }
}

}  // namespace xbadp
