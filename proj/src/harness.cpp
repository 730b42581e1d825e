#include "xbadp/harness.hpp"

#include <algorithm>
#include <cmath>

#include "xbadp/instance_gen.hpp"
#include "xbadp/perfect_info.hpp"

namespace xbadp {

namespace {

void tally(const Instance& inst, EpisodeResult& r, const std::vector<int>& revealed, const std::vector<int>& covered) {
    const double hours = inst.period_hours();
    r.covered_pieces = covered;
    std::sort(r.covered_pieces.begin(), r.covered_pieces.end());
    for (int k : revealed) {
        const auto& p = inst.pieces[k];
        r.revealed_reward += p.reward;
        r.revealed_hours += p.duration * hours;
        if (!std::binary_search(r.covered_pieces.begin(), r.covered_pieces.end(), k)) {
            r.uncovered_pieces.push_back(k);
            r.uncovered_reward += p.reward;
            r.uncovered_hours += p.duration * hours;
        }
    }
    for (int k : r.covered_pieces) {
        r.covered_reward += inst.pieces[k].reward;
        r.covered_hours += inst.pieces[k].duration * hours;
    }
    r.xb_shift_hours = 0.0;
    for (const auto& j : inst.xbs) r.xb_shift_hours += (j.end - j.start + 1) * hours;
    r.xb_covered_hours = 0.0;
    for (int periods : r.xb_productive_periods) r.xb_covered_hours += periods * hours;
}

EpisodeResult pi_episode(const Instance& inst, const SamplePath& path) {
    EpisodeResult r;
    r.policy = PolicyKind::perfect_info;
    r.path_seed = path.seed;
    const auto pi = pi_solve(inst, path);
    r.xb_productive_periods.assign(inst.xbs.size(), 0);
    std::vector<int> covered;
    for (const auto& [j, ks] : pi.xb_pieces)
        for (int k : ks) {
            covered.push_back(k);
            r.xb_productive_periods[j] += inst.pieces[k].duration;
        }
    Decisions d;
    for (const auto& [i, k] : pi.ot_piece) {
        covered.push_back(k);
        d.ot_assign[i] = k;
    }
    std::vector<int> revealed;
    for (const auto& w : path.reveals) revealed.insert(revealed.end(), w.begin(), w.end());
    tally(inst, r, revealed, covered);
    r.ot_surcharge = ot_surcharge(inst, d);
    r.total_reward = pi.reward;
    return r;
}

}  // namespace

EpisodeResult run_episode(const Instance& base, PolicyKind policy, const SamplePath& base_path, const EpisodeContext& ctx) {
    if (policy == PolicyKind::perfect_info) return pi_episode(base, base_path);

    Instance merged_local;
    const Instance* inst = &base;
    SamplePath path = base_path;
    if (policy == PolicyKind::practice) {
        if (!ctx.merged) merged_local = merge_regular_runs(base);
        inst = ctx.merged ? ctx.merged : &merged_local;
        path = path_from_sources(*inst, base_path.open_sources, base_path.seed);
    }
    if (policy == PolicyKind::approx && !ctx.artifacts) throw ContractViolation("run_episode: approximate policy needs artifacts");

    EpisodeResult r;
    r.policy = policy;
    r.path_seed = path.seed;
    r.xb_productive_periods.assign(inst->xbs.size(), 0);
    std::vector<int> covered, revealed;
    const auto mode = policy == PolicyKind::approx ? DecisionMode::sequence : DecisionMode::plain;

    State s = initial_state(*inst, path.at(0));
    revealed = path.at(0);
    for (Period t = 0; t < inst->T; ++t) {
        Decisions d;
        switch (policy) {
            case PolicyKind::approx: {
                auto ep = approx_epoch(*inst, s, *ctx.artifacts, ctx.cfg);
                if (ep.nontrivial) r.solve_ms.push_back(ep.solve_ms);
                r.deadline_hits += ep.solution.deadline_hit;
                d = std::move(ep.decisions);
                break;
            }
            case PolicyKind::myopic_xb_first: d = myopic_decide(*inst, s, MyopicMode::xb_first); break;
            case PolicyKind::myopic_ot_first: d = myopic_decide(*inst, s, MyopicMode::ot_first); break;
            case PolicyKind::practice: {
                Rng rng(derive_seed(path.seed, {0x7072616374, std::uint64_t(t)}));
                d = practice_decide(*inst, s, ctx.cfg.overrule_p, rng);
                break;
            }
            case PolicyKind::perfect_info: break;
        }
        if (auto v = decision_violations(*inst, s, d, mode); !v.empty()) {
            std::string msg = "policy " + std::string(to_string(policy)) + " infeasible at t=" + std::to_string(t) +
                              " on path " + std::to_string(path.seed);
            for (const auto& line : v) msg += "; " + line;
            throw ContractViolation(msg);
        }
        const double gained = reward(*inst, s, d, mode);
        r.total_reward += gained;
        r.ot_surcharge += ot_surcharge(*inst, d);
        for (const auto& [j, seq] : d.xb_assign)
            for (int k : seq) {
                covered.push_back(k);
                r.xb_productive_periods[j] += inst->pieces[k].duration;
            }
        for (const auto& [i, k] : d.ot_assign) covered.push_back(k);
        if (ctx.keep_log) r.log.push_back({t, d, gained});
        State post = apply_decisions(*inst, s, d, mode);
        if (t + 1 < inst->T) {
            const auto& w = path.at(t + 1);
            revealed.insert(revealed.end(), w.begin(), w.end());
            s = apply_exogenous(*inst, post, w);
        }
    }
    tally(*inst, r, revealed, covered);
    return r;
}

std::vector<std::uint64_t> path_seeds(std::uint64_t seed, int n_paths) {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < n_paths; ++i) out.push_back(derive_seed(seed, {std::uint64_t(i)}));
    return out;
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double sum = 0.0, c = 0.0;
    for (double x : xs) {  // Kahan
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    const double mean = sum / xs.size();
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    c = 0.0;
    for (double x : xs) {
        const double y = (x - mean) * (x - mean) - c;
        const double t = ss + y;
        c = (t - ss) - y;
        ss = t;
    }
    return {mean, std::sqrt(ss / (xs.size() - 1))};
}

PolicySummary summarize(PolicyKind policy, int n_xb, double p_scale, const std::vector<EpisodeResult>& eps,
                        std::optional<double> pi_mean) {
    PolicySummary s;
    s.policy = policy;
    s.n_xb = n_xb;
    s.p_scale = p_scale;
    s.n_paths = static_cast<int>(eps.size());
    std::vector<double> total, cov, unc, util;
    double revealed = 0.0, uncovered = 0.0;
    long long slow = 0;
    for (const auto& e : eps) {
        total.push_back(e.total_reward);
        cov.push_back(e.covered_hours);
        unc.push_back(e.uncovered_hours);
        util.push_back(e.utilization());
        revealed += e.revealed_hours;
        uncovered += e.uncovered_hours;
        for (double ms : e.solve_ms) {
            ++s.solves;
            slow += ms > 500.0;
            s.max_solve_ms = std::max(s.max_solve_ms, ms);
        }
        s.deadline_hits += e.deadline_hits;
    }
    std::tie(s.mean, s.sd) = mean_sd(total);
    s.cv = s.mean != 0.0 ? s.sd / s.mean : 0.0;
    if (pi_mean && *pi_mean != 0.0) s.gap = (*pi_mean - s.mean) / *pi_mean;
    s.covered_hours = mean_sd(cov).first;
    s.uncovered_hours = mean_sd(unc).first;
    s.uncovered_pct = revealed > 0.0 ? 100.0 * uncovered / revealed : 0.0;
    s.utilization = mean_sd(util).first;
    s.slow_solve_frac = s.solves > 0 ? double(slow) / s.solves : 0.0;
    return s;
}

Evaluation evaluate(const Instance& base, const EvalConfig& cfg, const ValueArtifacts* artifacts, ArtifactCache* cache) {
    Evaluation ev;
    const Instance inst = cfg.p_scale == 1.0 ? base : scale_probabilities(base, cfg.p_scale);
    const bool needs_art = std::find(cfg.policies.begin(), cfg.policies.end(), PolicyKind::approx) != cfg.policies.end();
    if (needs_art) {
        if (artifacts) {
            check_artifacts(*artifacts, inst, instance_hash(inst));
            ev.artifacts = *artifacts;
        } else {
            ev.artifacts = train_artifacts(inst, cfg.train, cache);
        }
    }
    const Instance merged = merge_regular_runs(inst);
    EpisodeContext ctx;
    ctx.artifacts = needs_art ? &ev.artifacts : nullptr;
    ctx.merged = &merged;
    ctx.cfg = cfg.policy_cfg;

    ev.path_seeds = path_seeds(cfg.seed, cfg.n_paths);
    std::vector<SamplePath> paths;
    for (auto seed : ev.path_seeds) paths.push_back(sample_path(inst, seed));
    for (PolicyKind policy : cfg.policies) {
        auto& eps = ev.episodes[policy];
        for (const auto& path : paths) eps.push_back(run_episode(inst, policy, path, ctx));
    }
    std::optional<double> pi_mean;
    if (auto it = ev.episodes.find(PolicyKind::perfect_info); it != ev.episodes.end()) {
        std::vector<double> xs;
        for (const auto& e : it->second) xs.push_back(e.total_reward);
        pi_mean = mean_sd(xs).first;
    }
    for (PolicyKind policy : cfg.policies)
        ev.table.rows.push_back(summarize(policy, static_cast<int>(inst.xbs.size()), cfg.p_scale, ev.episodes[policy], pi_mean));
    if (!cfg.keep_episodes) ev.episodes.clear();
    return ev;
}

}  // namespace xbadp
