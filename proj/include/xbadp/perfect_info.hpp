#pragma once

#include <map>
#include <vector>

#include "xbadp/mdp.hpp"

namespace xbadp {

struct PiResult {
    double reward = 0.0;
    std::map<int, std::vector<int>> xb_pieces;  ///< XB id -> covered pieces, by start
    std::map<int, int> ot_piece;                ///< OT id -> covered piece
    long long nodes = 0;
};

/// Exact offline optimum when the whole day's open work is known up front: each XB covers non-overlapping
/// pieces inside its shift, each OT at most one piece starting in its window, minus the surcharge.
PiResult pi_solve(const Instance& inst, const SamplePath& path);
/// Same problem over an explicit piece list.
PiResult pi_solve_pieces(const Instance& inst, const std::vector<int>& pieces);

}  // namespace xbadp
