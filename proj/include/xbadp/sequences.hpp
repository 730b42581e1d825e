#pragma once

#include <vector>

#include "xbadp/mdp.hpp"

namespace xbadp {

/// Pairwise non-overlapping pieces, sorted by start.
struct Sequence {
    std::vector<int> pieces;
    Period a = 0;  ///< start of the first piece
    Period b = 0;  ///< last period of the last piece
    double reward = 0.0;

    int delta() const noexcept { return b - a + 1; }

    friend bool operator==(const Sequence&, const Sequence&) = default;
};

/// Every subset of open pieces eligible for XB j with size in [1, l_max] whose pieces are pairwise disjoint.
/// Ordered by size, then by piece ids.
std::vector<Sequence> enumerate_sequences(const Instance& inst, const State& s, int j, int l_max);

/// Drops m when some strict superset m' among the open pieces eligible for j, within the size cap,
/// ends no later than m. Equivalent to: a single extra piece fits before b_m.
std::vector<Sequence> prune_dominated(const Instance& inst, const State& s, int j, int l_max,
                                      std::vector<Sequence> seqs);

}  // namespace xbadp
