#include "xbadp/loss_training.hpp"

#include <algorithm>
#include <cmath>

#include "xbadp/rng.hpp"

namespace xbadp {

namespace {
constexpr std::uint64_t kXbStream = 0x7862;  // "xb"
constexpr std::uint64_t kOtStream = 0x6f74;  // "ot"
}  // namespace

double XbLossTable::at(Period t) const noexcept {
    if (t < s || t - s >= static_cast<Period>(slopes.size())) return 0.0;
    return slopes[t - s];
}

double OtLossTable::at(Period t) const noexcept {
    if (t < s || t - s >= static_cast<Period>(slopes.size())) return 0.0;
    return slopes[t - s];
}

int compute_n_max(const Instance& inst) {
    int peak = 0;
    for (Period t = 0; t < inst.T; ++t) {
        int on = 0;
        for (const auto& j : inst.xbs) on += j.start <= t && t <= j.end;
        peak = std::max(peak, on);
    }
    return std::max(1, peak - 1);
}

double source_best_value(const Instance& inst, const Extraboard& xb, int h, const XbValueTable& table) {
    const auto& ids = inst.sources[h].piece_ids;
    const Period a_h = inst.pieces[ids.front()].start;
    double best = -1.0, sum = 0.0;
    for (int kid : ids) {
        const auto& k = inst.pieces[kid];
        if (!xb_eligible(xb, k)) break;
        sum += k.reward;
        best = std::max(best, sum + table.at(k.last() + 1, a_h));
    }
    return best;
}

SlopeFit fit_truncated_slope(const std::vector<double>& v, double r2_min) {
    if (v.size() < 2) throw ContractViolation("fit_truncated_slope: need at least two points");
    for (int n_upper = static_cast<int>(v.size()) - 1; n_upper >= 1; --n_upper) {
        const int m = n_upper + 1;
        double mx = 0.0, my = 0.0;
        for (int n = 0; n < m; ++n) {
            mx += n;
            my += v[n];
        }
        mx /= m;
        my /= m;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (int n = 0; n < m; ++n) {
            sxx += (n - mx) * (n - mx);
            sxy += (n - mx) * (v[n] - my);
            syy += (v[n] - my) * (v[n] - my);
        }
        const double slope = sxy / sxx;
        double r2 = 1.0;
        if (syy > 0.0) {
            const double intercept = my - slope * mx;
            double ss_res = 0.0;
            for (int n = 0; n < m; ++n) {
                const double e = v[n] - (intercept + slope * n);
                ss_res += e * e;
            }
            r2 = 1.0 - ss_res / syy;
        }
        // Two points always fit exactly; rounding must not push n_upper = 1 below the threshold.
        if (r2 >= r2_min || n_upper == 1) return {syy > 0.0 ? slope : 0.0, n_upper, n_upper == 1 ? 1.0 : r2};
    }
    return {};
}

namespace {

struct Candidate {
    Period start;
    double value;
    double p;
};

/// Steps 3-8 for one epoch t: candidates must be sorted by start.
LossCurve position_curve(const std::vector<Candidate>& cands, Period t, int n_max, const LossOptions& opts,
                         std::uint64_t stream_seed) {
    LossCurve curve;
    curve.t = t;
    curve.v_tilde.assign(n_max + 1, 0.0);
    auto first = std::upper_bound(cands.begin(), cands.end(), t,
                                  [](Period x, const Candidate& c) { return x < c.start; });
    Rng rng(stream_seed);
    std::vector<const Candidate*> open;
    for (int xi = 0; xi < opts.n_scenarios; ++xi) {
        open.clear();
        for (auto it = first; it != cands.end(); ++it)
            if (rng.bernoulli(it->p)) open.push_back(&*it);
        // Random order within equal start times.
        for (std::size_t lo = 0; lo < open.size();) {
            std::size_t hi = lo + 1;
            while (hi < open.size() && open[hi]->start == open[lo]->start) ++hi;
            for (std::size_t r = hi - 1; r > lo; --r) std::swap(open[r], open[lo + rng.below(r - lo + 1)]);
            lo = hi;
        }
        const std::size_t upto = std::min(open.size(), static_cast<std::size_t>(n_max + 1));
        for (std::size_t n = 0; n < upto; ++n) curve.v_tilde[n] += open[n]->value;
    }
    if (opts.n_scenarios > 0)
        for (auto& x : curve.v_tilde) x /= opts.n_scenarios;
    curve.fit = fit_truncated_slope(curve.v_tilde, opts.r2_min);
    return curve;
}

double clamp_slope(double slope) { return slope > 0.0 ? 0.0 : slope; }

void sort_by_start(std::vector<Candidate>& c) {
    std::stable_sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) { return a.start < b.start; });
}

}  // namespace

XbLossTable train_xb_loss(const Instance& inst, const Extraboard& xb, const XbValueTable& table, int n_max,
                          const LossOptions& opts, std::vector<LossCurve>* curves) {
    XbLossTable out;
    out.j = xb.id;
    out.s = xb.start;
    out.e = xb.end;
    out.slopes.assign(xb.end - xb.start + 1, 0.0);
    if (inst.pieces.empty()) return out;

    std::vector<Candidate> cands;
    for (const auto& h : inst.sources) {
        const double v = source_best_value(inst, xb, h.id, table);
        if (v >= 0.0) cands.push_back({inst.source_start(h.id), v, h.p});
    }
    sort_by_start(cands);
    const Period last = xb.end - inst.delta_min();
    for (Period t = xb.start; t <= last; ++t) {
        auto curve = position_curve(cands, t, n_max, opts,
                                    derive_seed(opts.seed, {kXbStream, std::uint64_t(xb.start), std::uint64_t(xb.end),
                                                            std::uint64_t(t)}));
        out.slopes[t - xb.start] = clamp_slope(curve.fit.slope);
        if (curves) curves->push_back(std::move(curve));
    }
    return out;
}

OtLossTable train_ot_loss(const Instance& inst, const OvertimeDriver& ot, int n_max, const LossOptions& opts,
                          std::vector<LossCurve>* curves) {
    OtLossTable out;
    out.i = ot.id;
    out.s = ot.start;
    out.slopes.assign(inst.delta_ot + 1, 0.0);

    std::vector<Candidate> cands;
    for (const auto& h : inst.sources) {
        const auto& k = inst.pieces[h.piece_ids.front()];
        if (ot_eligible(ot, k, inst.delta_ot)) cands.push_back({k.start, ot_net_value(inst, ot, k), h.p});
    }
    sort_by_start(cands);
    for (Period t = ot.start; t < ot.start + inst.delta_ot; ++t) {
        auto curve = position_curve(cands, t, n_max, opts,
                                    derive_seed(opts.seed, {kOtStream, std::uint64_t(ot.start), std::uint64_t(t)}));
        out.slopes[t - ot.start] = clamp_slope(curve.fit.slope);
        if (curves) curves->push_back(std::move(curve));
    }
    return out;
}

}  // namespace xbadp
