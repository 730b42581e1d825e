#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xbadp/artifacts.hpp"
#include "xbadp/bp_solver.hpp"
#include "xbadp/mdp.hpp"
#include "xbadp/rng.hpp"
#include "xbadp/sequences.hpp"

namespace xbadp {

enum class PolicyKind { approx, myopic_xb_first, myopic_ot_first, practice, perfect_info };

std::string_view to_string(PolicyKind kind) noexcept;
/// Accepts "approx", "myopic_xb_first" (or "myo_xb"), "myopic_ot_first" (or "myo_ot"), "practice", "pi".
PolicyKind parse_policy(std::string_view name);

struct PolicyConfig {
    int l_max = 4;
    bool prune_dominated = true;
    ProgramMode mode = ProgramMode::oversupply;
    double overrule_p = 0.2;
    std::optional<double> deadline_ms;
};

/// Everything the approximate policy computed at one epoch, kept for explanations.
struct ApproxEpoch {
    EpochProgram program;
    std::vector<std::vector<Sequence>> sequences;  ///< per XB entry, aligned with program.xbs[q].options
    EpochSolution solution;
    Decisions decisions;
    double solve_ms = 0.0;
    bool nontrivial = false;  ///< at least one driver had a real choice
};

EpochProgram build_program(const Instance& inst, const State& s, const ValueArtifacts& art, const PolicyConfig& cfg,
                           std::vector<std::vector<Sequence>>* sequences = nullptr);
ApproxEpoch approx_epoch(const Instance& inst, const State& s, const ValueArtifacts& art, const PolicyConfig& cfg);
Decisions approx_decide(const Instance& inst, const State& s, const ValueArtifacts& art, const PolicyConfig& cfg);

enum class MyopicMode { xb_first, ot_first };
Decisions myopic_decide(const Instance& inst, const State& s, MyopicMode mode);

/// Straight runs become two pieces split where the durations differ least (earlier split on ties);
/// split runs become one piece per session; other sources are untouched. Source ids are preserved.
Instance merge_regular_runs(const Instance& inst);

/// XB-first FIFO on the merged instance; each tentative choice is overruled with probability overrule_p,
/// handing the piece to a uniformly random other eligible driver, or dropping it when none exists.
Decisions practice_decide(const Instance& merged, const State& s, double overrule_p, Rng& rng);

}  // namespace xbadp
