#include "xbadp/sequences.hpp"

#include <algorithm>

namespace xbadp {

namespace {

std::vector<int> eligible_open(const Instance& inst, const State& s, int j) {
    std::vector<int> out;
    for (int k : s.open)
        if (inst.pieces[k].start >= s.t && xb_eligible(inst.xbs[j], inst.pieces[k])) out.push_back(k);
    std::sort(out.begin(), out.end(), [&](int x, int y) {
        const auto& px = inst.pieces[x];
        const auto& py = inst.pieces[y];
        return px.start != py.start ? px.start < py.start : x < y;
    });
    return out;
}

}  // namespace

std::vector<Sequence> enumerate_sequences(const Instance& inst, const State& s, int j, int l_max) {
    std::vector<Sequence> out;
    if (l_max < 1) return out;
    const auto cand = eligible_open(inst, s, j);
    std::vector<int> chain;
    // Chains in start order; non-overlap of consecutive members implies pairwise non-overlap.
    auto extend = [&](auto&& self, std::size_t from, double reward) -> void {
        for (std::size_t r = from; r < cand.size(); ++r) {
            const auto& k = inst.pieces[cand[r]];
            if (!chain.empty() && inst.pieces[chain.back()].last() >= k.start) continue;
            chain.push_back(cand[r]);
            Sequence seq;
            seq.pieces = chain;
            std::sort(seq.pieces.begin(), seq.pieces.end(),
                      [&](int x, int y) { return inst.pieces[x].start < inst.pieces[y].start; });
            seq.a = inst.pieces[chain.front()].start;
            seq.b = k.last();
            seq.reward = reward + k.reward;
            out.push_back(std::move(seq));
            if (static_cast<int>(chain.size()) < l_max) self(self, r + 1, reward + k.reward);
            chain.pop_back();
        }
    };
    extend(extend, 0, 0.0);
    auto key = [](const Sequence& q) {
        auto ids = q.pieces;
        std::sort(ids.begin(), ids.end());
        return std::make_pair(ids.size(), ids);
    };
    std::sort(out.begin(), out.end(), [&](const Sequence& x, const Sequence& y) { return key(x) < key(y); });
    return out;
}

std::vector<Sequence> prune_dominated(const Instance& inst, const State& s, int j, int l_max,
                                      std::vector<Sequence> seqs) {
    const auto cand = eligible_open(inst, s, j);
    std::vector<Sequence> kept;
    for (auto& m : seqs) {
        bool dominated = false;
        if (static_cast<int>(m.pieces.size()) < l_max) {
            for (int kid : cand) {
                const auto& k = inst.pieces[kid];
                if (k.last() > m.b || std::find(m.pieces.begin(), m.pieces.end(), kid) != m.pieces.end()) continue;
                const bool fits = std::none_of(m.pieces.begin(), m.pieces.end(), [&](int o) {
                    const auto& q = inst.pieces[o];
                    return q.start <= k.last() && k.start <= q.last();
                });
                if (fits) {
                    dominated = true;
                    break;
                }
            }
        }
        if (!dominated) kept.push_back(std::move(m));
    }
    return kept;
}

}  // namespace xbadp
