#include "xbadp/policies.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>

namespace xbadp {

std::string_view to_string(PolicyKind kind) noexcept {
    switch (kind) {
        case PolicyKind::approx: return "approx";
        case PolicyKind::myopic_xb_first: return "myopic_xb_first";
        case PolicyKind::myopic_ot_first: return "myopic_ot_first";
        case PolicyKind::practice: return "practice";
        case PolicyKind::perfect_info: return "pi";
    }
    return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
    if (name == "approx") return PolicyKind::approx;
    if (name == "myopic_xb_first" || name == "myo_xb") return PolicyKind::myopic_xb_first;
    if (name == "myopic_ot_first" || name == "myo_ot") return PolicyKind::myopic_ot_first;
    if (name == "practice") return PolicyKind::practice;
    if (name == "pi" || name == "perfect_info") return PolicyKind::perfect_info;
    throw ParseError("unknown policy '" + std::string(name) + "'");
}

EpochProgram build_program(const Instance& inst, const State& s, const ValueArtifacts& art, const PolicyConfig& cfg,
                           std::vector<std::vector<Sequence>>* sequences) {
    EpochProgram p;
    p.pieces = s.open;
    p.n_max = art.n_max;
    p.mode = cfg.mode;
    for (int j : available_xbs(inst, s)) {
        auto seqs = enumerate_sequences(inst, s, j, cfg.l_max);
        if (cfg.prune_dominated) seqs = prune_dominated(inst, s, j, cfg.l_max, std::move(seqs));
        const auto& table = art.xb_tables.at(j);
        XbEntry e;
        e.driver = j;
        e.v_hld = table.at(s.t + 1, s.t);
        e.slope = art.xb_loss(j, s.t);
        for (const auto& m : seqs) e.options.push_back({m.pieces, m.reward, table.at(m.b + 1, s.t)});
        p.xbs.push_back(std::move(e));
        if (sequences) sequences->push_back(std::move(seqs));
    }
    for (int i : available_ots(inst, s)) {
        const auto& ot = inst.ots[i];
        OtEntry e;
        e.driver = i;
        e.v_hld = art.ot_tables.at(i).at(s.t + 1 - ot.start);
        e.slope = art.ot_loss(i, s.t);
        for (int k : s.open)
            if (ot_eligible(ot, inst.pieces[k], inst.delta_ot)) e.options.push_back({k, ot_net_value(inst, ot, inst.pieces[k])});
        p.ots.push_back(std::move(e));
    }
    return p;
}

ApproxEpoch approx_epoch(const Instance& inst, const State& s, const ValueArtifacts& art, const PolicyConfig& cfg) {
    ApproxEpoch ep;
    ep.program = build_program(inst, s, art, cfg, &ep.sequences);
    for (const auto& x : ep.program.xbs) ep.nontrivial |= !x.options.empty();
    for (const auto& o : ep.program.ots) ep.nontrivial |= !o.options.empty();
    SolveOptions so;
    so.deadline_ms = cfg.deadline_ms;
    const auto t0 = std::chrono::steady_clock::now();
    ep.solution = solve_exact(ep.program, so);
    ep.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (std::size_t q = 0; q < ep.program.xbs.size(); ++q)
        if (ep.solution.xb_choice[q] >= 0)
            ep.decisions.xb_assign[ep.program.xbs[q].driver] = ep.sequences[q][ep.solution.xb_choice[q]].pieces;
    for (std::size_t q = 0; q < ep.program.ots.size(); ++q)
        if (ep.solution.ot_choice[q] >= 0)
            ep.decisions.ot_assign[ep.program.ots[q].driver] = ep.program.ots[q].options[ep.solution.ot_choice[q]].piece;
    return ep;
}

Decisions approx_decide(const Instance& inst, const State& s, const ValueArtifacts& art, const PolicyConfig& cfg) {
    return approx_epoch(inst, s, art, cfg).decisions;
}

namespace {

/// Eligible, available XB with the earliest shift end (lowest id on ties); -1 if none.
int pick_xb(const Instance& inst, const State& s, const WorkPiece& k, const std::vector<bool>& taken) {
    int best = -1;
    for (int j = 0; j < static_cast<int>(inst.xbs.size()); ++j) {
        if (taken[j] || !xb_available(inst, s, j) || !xb_eligible(inst.xbs[j], k)) continue;
        if (best < 0 || inst.xbs[j].end < inst.xbs[best].end) best = j;
    }
    return best;
}

/// Eligible, available OT on standby longest (lowest id on ties); -1 if none.
int pick_ot(const Instance& inst, const State& s, const WorkPiece& k, const std::vector<bool>& taken) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(inst.ots.size()); ++i) {
        if (taken[i] || !ot_available(inst, s, i) || !ot_eligible(inst.ots[i], k, inst.delta_ot)) continue;
        if (best < 0 || s.phi[i] > s.phi[best]) best = i;
    }
    return best;
}

}  // namespace

Decisions myopic_decide(const Instance& inst, const State& s, MyopicMode mode) {
    Decisions d;
    std::vector<bool> xb_taken(inst.xbs.size(), false), ot_taken(inst.ots.size(), false);
    for (int kid : now_pieces(inst, s)) {
        const auto& k = inst.pieces[kid];
        auto try_xb = [&] {
            const int j = pick_xb(inst, s, k, xb_taken);
            if (j < 0) return false;
            xb_taken[j] = true;
            d.xb_assign[j] = {kid};
            return true;
        };
        auto try_ot = [&] {
            const int i = pick_ot(inst, s, k, ot_taken);
            if (i < 0) return false;
            ot_taken[i] = true;
            d.ot_assign[i] = kid;
            return true;
        };
        if (mode == MyopicMode::xb_first) {
            if (!try_xb()) try_ot();
        } else if (!try_ot()) {
            try_xb();
        }
    }
    return d;
}

Instance merge_regular_runs(const Instance& inst) {
    Instance out = inst;
    out.pieces.clear();
    auto span_piece = [&](const std::vector<int>& ids, std::size_t lo, std::size_t hi, int source) {
        WorkPiece w;
        w.id = static_cast<int>(out.pieces.size());
        w.source_id = source;
        w.start = inst.pieces[ids[lo]].start;
        w.duration = inst.pieces[ids[hi - 1]].end() - w.start;
        w.route = inst.pieces[ids[lo]].route;
        for (std::size_t r = lo; r < hi; ++r) w.reward += inst.pieces[ids[r]].reward;
        w.label = inst.pieces[ids[lo]].label;
        out.pieces.push_back(w);
        return w.id;
    };
    for (auto& h : out.sources) {
        const auto ids = inst.sources[h.id].piece_ids;
        std::vector<int> fresh;
        std::size_t cut = 0;
        if (h.kind == SourceKind::straight_run && ids.size() >= 2) {
            int best = -1;
            for (std::size_t r = 1; r < ids.size(); ++r) {
                int first = 0, second = 0;
                for (std::size_t q = 0; q < ids.size(); ++q) (q < r ? first : second) += inst.pieces[ids[q]].duration;
                const int diff = std::abs(first - second);
                if (best < 0 || diff < best) {
                    best = diff;
                    cut = r;
                }
            }
        } else if (h.kind == SourceKind::split_run && h.split_at >= 1) {
            cut = static_cast<std::size_t>(h.split_at);
        }
        if (cut > 0) {
            fresh.push_back(span_piece(ids, 0, cut, h.id));
            fresh.push_back(span_piece(ids, cut, ids.size(), h.id));
            h.split_at = h.kind == SourceKind::split_run ? 1 : -1;
        } else {
            for (int kid : ids) {
                WorkPiece w = inst.pieces[kid];
                w.id = static_cast<int>(out.pieces.size());
                out.pieces.push_back(w);
                fresh.push_back(w.id);
            }
        }
        h.piece_ids = std::move(fresh);
    }
    return out;
}

Decisions practice_decide(const Instance& merged, const State& s, double overrule_p, Rng& rng) {
    Decisions d;
    std::vector<bool> xb_taken(merged.xbs.size(), false), ot_taken(merged.ots.size(), false);
    for (int kid : now_pieces(merged, s)) {
        const auto& k = merged.pieces[kid];
        int j = pick_xb(merged, s, k, xb_taken);
        int i = j < 0 ? pick_ot(merged, s, k, ot_taken) : -1;
        if (j < 0 && i < 0) continue;
        if (rng.bernoulli(overrule_p)) {
            // Drivers are numbered XBs first, then OTs.
            std::vector<int> others;
            for (int q = 0; q < static_cast<int>(merged.xbs.size()); ++q)
                if (q != j && !xb_taken[q] && xb_available(merged, s, q) && xb_eligible(merged.xbs[q], k)) others.push_back(q);
            const int nx = static_cast<int>(merged.xbs.size());
            for (int q = 0; q < static_cast<int>(merged.ots.size()); ++q)
                if (q != i && !ot_taken[q] && ot_available(merged, s, q) && ot_eligible(merged.ots[q], k, merged.delta_ot))
                    others.push_back(nx + q);
            j = i = -1;
            if (others.empty()) continue;
            const int pick = others[rng.below(others.size())];
            (pick < nx ? j : i) = pick < nx ? pick : pick - nx;
        }
        if (j >= 0) {
            xb_taken[j] = true;
            d.xb_assign[j] = {kid};
        } else {
            ot_taken[i] = true;
            d.ot_assign[i] = kid;
        }
    }
    return d;
}

}  // namespace xbadp
