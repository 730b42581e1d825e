#pragma once

#include <cstdint>
#include <vector>

#include "xbadp/schedule.hpp"
#include "xbadp/value_training.hpp"

namespace xbadp {

struct LossOptions {
    int n_scenarios = 500;
    double r2_min = 0.995;
    std::uint64_t seed = 0;
};

struct SlopeFit {
    double slope = 0.0;
    int n_upper = 0;
    double r2 = 1.0;
};

/// Scenario-averaged value ṽ(n) at one epoch, with its fit.
struct LossCurve {
    Period t = 0;
    std::vector<double> v_tilde;
    SlopeFit fit;
};

/// Per-position loss slopes for an XB, t in [s, e]; zero outside.
struct XbLossTable {
    int j = -1;
    Period s = 0;
    Period e = 0;
    std::vector<double> slopes;  ///< slopes[t-s]

    double at(Period t) const noexcept;

    friend bool operator==(const XbLossTable&, const XbLossTable&) = default;
};

/// Per-position loss slopes for an OT, t in [s, s+δ_ot]; zero outside.
struct OtLossTable {
    int i = -1;
    Period s = 0;
    std::vector<double> slopes;  ///< slopes[t-s]

    double at(Period t) const noexcept;

    friend bool operator==(const OtLossTable&, const OtLossTable&) = default;
};

/// Max number of XBs on shift at any period, minus one, at least 1.
int compute_n_max(const Instance& inst);

/// max over prefixes starting at the source's first piece of sum c + v̄(b+1, a_h).
/// Returns a negative number when the first piece is not eligible.
double source_best_value(const Instance& inst, const Extraboard& xb, int h, const XbValueTable& table);

/// OLS with intercept over n = 0..n_upper, shrinking n_upper from the top until r² >= r2_min.
/// SS_tot = 0 counts as r² = 1. Needs at least two points.
SlopeFit fit_truncated_slope(const std::vector<double>& v_tilde, double r2_min = 0.995);

XbLossTable train_xb_loss(const Instance& inst, const Extraboard& xb, const XbValueTable& table, int n_max,
                          const LossOptions& opts, std::vector<LossCurve>* curves = nullptr);
OtLossTable train_ot_loss(const Instance& inst, const OvertimeDriver& ot, int n_max, const LossOptions& opts,
                          std::vector<LossCurve>* curves = nullptr);

}  // namespace xbadp
