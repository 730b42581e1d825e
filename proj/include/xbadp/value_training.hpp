#pragma once

#include <utility>
#include <vector>

#include "xbadp/schedule.hpp"

namespace xbadp {

/// v̄_j(τ, t) for τ in [s+1, e+1], t in [s, τ-1]. Lookups outside that domain return 0.
struct XbValueTable {
    int j = -1;  ///< roster id, or -1 for a planning-period table keyed only by (s, e)
    Period s = 0;
    Period e = 0;
    std::vector<std::vector<double>> rows;  ///< rows[τ-s-1][t-s]

    double at(Period tau, Period t) const noexcept;
    void set(Period tau, Period t, double v);

    friend bool operator==(const XbValueTable&, const XbValueTable&) = default;
};

/// v̄_i(φ) for φ in [1, δ_ot+1]; other φ return 0.
struct OtValueTable {
    int i = -1;
    Period s = 0;
    std::vector<double> values;  ///< values[φ-1]

    double at(int phi) const noexcept;

    friend bool operator==(const OtValueTable&, const OtValueTable&) = default;
};

/// v1 p1 + sum_r v_r p_r prod_{q<r}(1-p_q) + v_base prod(1-p_q).
/// `ranked` holds (v, p) sorted by descending v, every v above v_base; otherwise ContractViolation.
double chain_expectation(const std::vector<std::pair<double, double>>& ranked, double v_base);

/// Best prefix value of source h for an XB interested in its piece starting at tau, evaluated at epoch t:
/// max over prefixes {k1..kr} (stopping at the first ineligible piece) of sum c + v̄(b+1, t).
/// Returns a negative number when h has no eligible piece starting at tau.
double best_sequence_value(const Instance& inst, const Extraboard& xb, int h, Period tau, Period t,
                           const XbValueTable& table);

/// Backward DP over (τ, t) for one shift. `xb` may be a hypothetical shift not in the roster.
XbValueTable train_xb_values(const Instance& inst, const Extraboard& xb);
/// Backward DP over φ for one OT report time.
OtValueTable train_ot_values(const Instance& inst, const OvertimeDriver& ot);

}  // namespace xbadp
