#pragma once

#include <optional>
#include <string>
#include <vector>

namespace xbadp {

enum class ProgramMode { simple, oversupply };

struct XbOption {
    std::vector<int> pieces;  ///< piece ids covered by the sequence
    double immediate = 0.0;   ///< sum of c_k
    double future = 0.0;      ///< v̄_j(b_m+1, t)

    double value() const noexcept { return immediate + future; }
};

struct XbEntry {
    int driver = 0;
    std::vector<XbOption> options;
    double v_hld = 0.0;  ///< v̄_j(t+1, t)
    double slope = 0.0;  ///< l̄_tj, <= 0
};

struct OtOption {
    int piece = 0;
    double net = 0.0;  ///< c_k minus the overtime surcharge
};

struct OtEntry {
    int driver = 0;
    std::vector<OtOption> options;
    double v_hld = 0.0;  ///< v̄_i(t+1-s_i)
    double slope = 0.0;  ///< l̄ᵒᵗ_ti, <= 0
};

/// One epoch's binary program. Holding is always allowed, so every program is feasible.
struct EpochProgram {
    std::vector<XbEntry> xbs;
    std::vector<OtEntry> ots;
    std::vector<int> pieces;  ///< open piece universe
    int n_max = 1;
    ProgramMode mode = ProgramMode::oversupply;
};

struct EpochSolution {
    std::vector<int> xb_choice;  ///< per XB entry: -1 hold, else option index
    std::vector<int> ot_choice;  ///< per OT entry: -1 hold, else option index
    double objective = 0.0;
    std::vector<int> covered;    ///< ascending piece ids
    bool deadline_hit = false;   ///< true when the search stopped early and returned its incumbent
    long long nodes = 0;
};

struct SolveOptions {
    std::optional<double> deadline_ms;
};

/// max(slope * position + v_hld, 0).
double hold_value(double v_hld, double slope, double position) noexcept;

/// Objective of a full assignment. Holding XBs get hold_value at position (N_hld-1)/2, holding OTs at N_hld
/// (oversupply mode) or their plain hold value (simple mode). Throws ContractViolation on clashing pieces.
double evaluate_objective(const EpochProgram& p, const std::vector<int>& xb_choice, const std::vector<int>& ot_choice);

/// Exact optimum. Among optimal assignments (objective within 1e-9 of the best), returns the lexicographically
/// smallest decision vector with XB entries first, then OTs, each coded 0 for hold and 1.. for options.
EpochSolution solve_exact(const EpochProgram& p, const SolveOptions& opts = {});

/// Brute force over every combination; same objective and tie rule. Throws when combinations exceed `cap`.
EpochSolution enumerate_oracle(const EpochProgram& p, long long cap = 10'000'000);

/// Invariant check; returns violations.
std::vector<std::string> validate_program(const EpochProgram& p);

std::string program_to_json(const EpochProgram& p);

}  // namespace xbadp
