#pragma once

#include <utility>
#include <vector>

#include "xbadp/schedule.hpp"

namespace fx {

/// Hand-built instances. Rewards default to duration in hours.
struct Builder {
    xbadp::Instance inst;

    explicit Builder(int T, int delta_ot = 4, double c_ot = 0.0) {
        inst.T = T;
        inst.delta_ot = delta_ot;
        inst.c_ot = c_ot;
    }

    /// Adds a source with pieces given as (start, duration). Returns the source id.
    int source(const std::vector<std::pair<int, int>>& pieces, double p = 1.0, const std::vector<double>& rewards = {}) {
        xbadp::WorkSource h;
        h.id = static_cast<int>(inst.sources.size());
        h.p = p;
        for (std::size_t q = 0; q < pieces.size(); ++q) {
            xbadp::WorkPiece k;
            k.id = static_cast<int>(inst.pieces.size());
            k.source_id = h.id;
            k.start = pieces[q].first;
            k.duration = pieces[q].second;
            k.reward = q < rewards.size() ? rewards[q] : k.duration * 0.25;
            h.piece_ids.push_back(k.id);
            inst.pieces.push_back(k);
        }
        inst.sources.push_back(h);
        return h.id;
    }

    Builder& xb(int s, int e) {
        inst.xbs.push_back({static_cast<int>(inst.xbs.size()), s, e, ""});
        return *this;
    }

    Builder& ot(int s) {
        inst.ots.push_back({static_cast<int>(inst.ots.size()), s, ""});
        return *this;
    }
};

}  // namespace fx
