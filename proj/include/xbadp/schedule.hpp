#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xbadp/errors.hpp"

namespace xbadp {

/// Index of a fixed-length wall-clock slice of the day, in [0, T).
using Period = int;

struct WorkPiece {
    int id = 0;
    int source_id = 0;
    Period start = 0;  ///< first period a_k
    int duration = 1;  ///< periods, >= 1
    double reward = 0.0;
    int route = -1;  ///< optional route tag, -1 when absent
    std::string label;

    Period last() const noexcept { return start + duration - 1; }
    Period end() const noexcept { return start + duration; }  ///< first period after the piece

    friend bool operator==(const WorkPiece&, const WorkPiece&) = default;
};

/// How a source came about; drives the piece-merging benchmark.
enum class SourceKind { unspecified, straight_run, split_run, extra_trip };

std::string_view to_string(SourceKind kind) noexcept;

/// Pieces sharing one Bernoulli openness outcome, revealed together at the first piece's start.
struct WorkSource {
    int id = 0;
    std::vector<int> piece_ids;  ///< sorted by start, pairwise non-overlapping
    double p = 0.0;
    SourceKind kind = SourceKind::unspecified;
    int split_at = -1;  ///< split runs: index into piece_ids where the second session begins
    std::string label;

    friend bool operator==(const WorkSource&, const WorkSource&) = default;
};

struct Extraboard {
    int id = 0;
    Period start = 0;  ///< report period s_j
    Period end = 0;    ///< last working period e_j
    std::string label;

    friend bool operator==(const Extraboard&, const Extraboard&) = default;
};

struct OvertimeDriver {
    int id = 0;
    Period start = 0;  ///< report period s_i
    std::string label;

    friend bool operator==(const OvertimeDriver&, const OvertimeDriver&) = default;
};

/// Static description of one garage-day. Ids are dense and equal to vector positions.
struct Instance {
    int T = 0;
    int period_minutes = 15;
    int delta_ot = 0;    ///< OT minimum-pay window length, periods
    double c_ot = 0.0;   ///< overtime surcharge per period past the window
    std::vector<WorkPiece> pieces;
    std::vector<WorkSource> sources;
    std::vector<Extraboard> xbs;
    std::vector<OvertimeDriver> ots;

    double period_hours() const noexcept { return period_minutes / 60.0; }
    /// Shortest piece duration; 0 when there are no pieces.
    int delta_min() const noexcept;
    Period source_start(int source_id) const;
    int first_piece(int source_id) const;

    friend bool operator==(const Instance&, const Instance&) = default;
};

bool xb_eligible(const Extraboard& xb, const WorkPiece& piece) noexcept;
bool ot_eligible(const OvertimeDriver& ot, const WorkPiece& piece, int delta_ot) noexcept;

/// Overtime paid past the minimum-pay window: max(0, a_k + delta_k - (s_i + delta_ot)) periods.
int ot_overrun(const OvertimeDriver& ot, const WorkPiece& piece, int delta_ot) noexcept;
/// c_k - c_ot * overrun.
double ot_net_value(const Instance& inst, const OvertimeDriver& ot, const WorkPiece& piece) noexcept;

std::vector<int> eligible_pieces_xb(const Extraboard& xb, const Instance& inst);
std::vector<int> eligible_pieces_ot(const OvertimeDriver& ot, const Instance& inst);

/// Every broken invariant, one human-readable line each. Empty means valid.
std::vector<std::string> validate_instance(const Instance& inst);

/// Parses the JSON schedule format. Throws ParseError or ValidationError.
Instance load_schedule(std::string_view text);
std::string save_schedule(const Instance& inst);

/// Stable 64-bit FNV-1a digest of the saved schedule, as 16 hex digits.
std::string instance_hash(const Instance& inst);

/// Sum over sources of p_h times the source's total piece hours.
double expected_open_hours(const Instance& inst);
/// Sum of all piece durations, in hours.
double total_piece_hours(const Instance& inst);

}  // namespace xbadp
