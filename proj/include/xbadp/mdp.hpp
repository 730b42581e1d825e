#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xbadp/schedule.hpp"

namespace xbadp {

/// Pre-decision snapshot, or post-decision when `post` is set (then t is still the epoch just decided).
struct State {
    Period t = 0;
    std::vector<Period> tau;  ///< next-available period per XB
    std::vector<int> phi;     ///< standby periods elapsed per OT; delta_ot + 1 once assigned or sent home
    std::vector<int> open;    ///< revealed, uncovered piece ids with start >= t, ascending
    bool post = false;

    friend bool operator==(const State&, const State&) = default;
};

struct Decisions {
    std::map<int, std::vector<int>> xb_assign;  ///< XB id -> start-sorted piece ids
    std::map<int, int> ot_assign;               ///< OT id -> piece id

    std::vector<int> covered() const;  ///< all assigned piece ids, ascending
    bool empty() const noexcept { return xb_assign.empty() && ot_assign.empty(); }

    friend bool operator==(const Decisions&, const Decisions&) = default;
};

enum class DecisionMode { plain, sequence };

/// Openness outcomes of one day. reveals[t] lists the pieces revealed at t, ascending.
struct SamplePath {
    std::uint64_t seed = 0;
    std::vector<int> open_sources;
    std::vector<std::vector<int>> reveals;

    const std::vector<int>& at(Period t) const;
};

State initial_state(const Instance& inst, const std::vector<int>& revealed_at_zero);

bool xb_available(const Instance& inst, const State& s, int j) noexcept;
bool ot_available(const Instance& inst, const State& s, int i) noexcept;
std::vector<int> available_xbs(const Instance& inst, const State& s);
std::vector<int> available_ots(const Instance& inst, const State& s);
/// Open pieces starting exactly at s.t.
std::vector<int> now_pieces(const Instance& inst, const State& s);

/// Names of every violated constraint; empty when the decisions are feasible.
std::vector<std::string> decision_violations(const Instance& inst, const State& s, const Decisions& d,
                                             DecisionMode mode);
bool decision_feasible(const Instance& inst, const State& s, const Decisions& d, DecisionMode mode);

/// Covered reward minus the overtime surcharge. Throws ContractViolation on infeasible decisions.
double reward(const Instance& inst, const State& s, const Decisions& d, DecisionMode mode = DecisionMode::sequence);
/// Surcharge part of reward(), in reward units (nonnegative).
double ot_surcharge(const Instance& inst, const Decisions& d);

State apply_decisions(const Instance& inst, const State& s, const Decisions& d,
                      DecisionMode mode = DecisionMode::sequence);
State apply_exogenous(const Instance& inst, const State& post, const std::vector<int>& revealed_next);

/// Every source is drawn once, in id order, open when uniform < p_scale * p_h.
/// Throws ContractViolation if p_scale pushes any probability above 1.
SamplePath sample_path(const Instance& inst, std::uint64_t seed, double p_scale = 1.0);
/// Rebuilds reveals from an explicit open-source list.
SamplePath path_from_sources(const Instance& inst, std::vector<int> open_sources, std::uint64_t seed = 0);

std::string path_to_json(const SamplePath& path);
SamplePath path_from_json(const Instance& inst, std::string_view text);

}  // namespace xbadp
