#include "xbadp/value_training.hpp"

#include <algorithm>

namespace xbadp {

double XbValueTable::at(Period tau, Period t) const noexcept {
    if (tau <= s || t < s || t >= tau) return 0.0;
    const auto r = static_cast<std::size_t>(tau - s - 1);
    if (r >= rows.size()) return 0.0;
    return rows[r][t - s];
}

void XbValueTable::set(Period tau, Period t, double v) { rows.at(tau - s - 1).at(t - s) = v; }

double OtValueTable::at(int phi) const noexcept {
    if (phi < 1 || phi > static_cast<int>(values.size())) return 0.0;
    return values[phi - 1];
}

double chain_expectation(const std::vector<std::pair<double, double>>& ranked, double v_base) {
    double total = 0.0;
    double none_yet = 1.0;  // probability that every higher-ranked option stayed closed
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        const auto [v, p] = ranked[r];
        if (!(v > v_base)) throw ContractViolation("chain_expectation: option not above base value");
        if (r > 0 && v > ranked[r - 1].first) throw ContractViolation("chain_expectation: options not sorted");
        if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("chain_expectation: probability outside [0,1]");
        total += v * p * none_yet;
        none_yet *= 1.0 - p;
    }
    return total + v_base * none_yet;
}

double best_sequence_value(const Instance& inst, const Extraboard& xb, int h, Period tau, Period t,
                           const XbValueTable& table) {
    const auto& ids = inst.sources[h].piece_ids;
    auto it = std::find_if(ids.begin(), ids.end(), [&](int k) { return inst.pieces[k].start == tau; });
    if (it == ids.end() || !xb_eligible(xb, inst.pieces[*it])) return -1.0;
    double best = -1.0, sum = 0.0;
    for (; it != ids.end(); ++it) {
        const auto& k = inst.pieces[*it];
        if (!xb_eligible(xb, k)) break;
        sum += k.reward;
        best = std::max(best, sum + table.at(k.last() + 1, t));
    }
    return best;
}

namespace {

struct Option {
    double v;
    double p;
    int id;
};

double combine(std::vector<Option>& opts, double v_base) {
    std::sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) {
        return a.v != b.v ? a.v > b.v : a.id < b.id;
    });
    std::vector<std::pair<double, double>> ranked;
    ranked.reserve(opts.size());
    for (const auto& o : opts) ranked.emplace_back(o.v, o.p);
    return chain_expectation(ranked, v_base);
}

}  // namespace

XbValueTable train_xb_values(const Instance& inst, const Extraboard& xb) {
    XbValueTable table;
    table.j = xb.id;
    table.s = xb.start;
    table.e = xb.end;
    for (Period tau = xb.start + 1; tau <= xb.end + 1; ++tau) table.rows.emplace_back(tau - xb.start, 0.0);
    if (inst.pieces.empty()) return table;

    // Per start period, the sources holding an eligible piece that starts there.
    std::vector<std::vector<int>> by_start(inst.T + 1);
    for (const auto& k : inst.pieces)
        if (xb_eligible(xb, k)) by_start[k.start].push_back(k.source_id);

    const Period top = xb.end - inst.delta_min() + 1;  // above this the band stays zero
    std::vector<Option> opts;
    for (Period tau = std::min(top, inst.T - 1); tau >= xb.start + 1; --tau) {
        const auto& sources = by_start[tau];
        for (Period t = tau - 1; t >= xb.start; --t) {
            const double v_base = table.at(tau + 1, t);
            opts.clear();
            for (int h : sources) {
                if (inst.source_start(h) <= t) continue;
                const double v = best_sequence_value(inst, xb, h, tau, t, table);
                if (v > v_base) opts.push_back({v, inst.sources[h].p, h});
            }
            table.set(tau, t, combine(opts, v_base));
        }
    }
    return table;
}

OtValueTable train_ot_values(const Instance& inst, const OvertimeDriver& ot) {
    OtValueTable table;
    table.i = ot.id;
    table.s = ot.start;
    table.values.assign(inst.delta_ot + 1, 0.0);
    std::vector<Option> opts;
    for (int phi = inst.delta_ot; phi >= 1; --phi) {
        const Period a = ot.start + phi;
        const double v_base = table.at(phi + 1);
        opts.clear();
        for (const auto& h : inst.sources) {
            const auto& k = inst.pieces[h.piece_ids.front()];
            if (k.start != a) continue;
            const double v = ot_net_value(inst, ot, k);
            if (v > v_base) opts.push_back({v, h.p, k.id});
        }
        table.values[phi - 1] = combine(opts, v_base);
    }
    return table;
}

}  // namespace xbadp
