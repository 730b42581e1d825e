#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbadp/schedule.hpp"

namespace xbadp {

enum class ServicePattern { flat, peaked, peak_only };

struct Window {
    Period start = 0;  ///< first period
    Period end = 0;    ///< one past the last period
    bool contains(Period t) const noexcept { return start <= t && t < end; }
};

struct RouteSpec {
    ServicePattern pattern = ServicePattern::flat;
    int rt_min = 4;  ///< round-trip duration range, periods
    int rt_max = 8;
    bool extra_trips = true;  ///< carries type-2 extra-trip sources
    bool long_runs = false;   ///< hosts 10-hour straight runs
};

struct GenParams {
    int T = 94;
    int period_minutes = 15;
    int delta_ot = 4;
    double c_ot = 0.0;
    std::vector<RouteSpec> routes;
    int straight8 = 68;   ///< 32-period straight runs
    int straight10 = 0;   ///< 40-period straight runs
    int split = 19;
    int part_time = 0;    ///< 20-24 period straight runs on peak-only routes
    double absence_p = 0.07;
    double extra_open_hours = 31.85;  ///< expected type-2 open hours; sets the extra-trip probability scale
    double peak_weight = 2.0;
    double extra_p_cap = 0.5;
    Window am{4, 20};
    Window pm{44, 60};
    std::vector<Period> operating_breaks{0, 4, 20, 44, 60, 68};  ///< starts of the operating periods
    std::uint64_t seed = 1;
};

/// Defaults aimed at the mid-size garage: 7 routes, 87 regular drivers, about 643 scheduled hours.
GenParams miway_params();
/// Defaults aimed at the large garage: 13 heterogeneous routes, 282 runs, about 2186 scheduled hours.
GenParams synthetic_params();

Instance generate_instance(const GenParams& p);
Instance gen_miway_like(GenParams p, std::uint64_t seed);
Instance gen_synthetic_large(GenParams p, std::uint64_t seed);

/// Hours of regular (straight and split) runs.
double scheduled_run_hours(const Instance& inst);

struct HeadwayBand {
    Window window;
    int headway_minutes = 20;
    bool peak = false;
};

struct WaitTimeConfig {
    double boarding_rate = 6.0;  ///< passengers boarding per period
    double peak_multiplier = 1.5;
    std::vector<double> route_multipliers;
    std::vector<HeadwayBand> bands;
};

/// Default bands: 30/15/20/15/20/30-minute headways with the two 15-minute bands as peaks.
std::vector<HeadwayBand> default_headway_bands();
/// Linear from `first` to `last` over `routes` routes.
std::vector<double> linear_multipliers(int routes, double first, double last);
WaitTimeConfig miway_wait_config();
WaitTimeConfig synthetic_wait_config();

/// c_k = rate * δ_k * route multiplier * (peak multiplier if peak) * headway hours, using the band of a_k.
/// Throws ContractViolation for a piece without a route or outside every band.
Instance apply_wait_time_rewards(const Instance& inst, const WaitTimeConfig& cfg);

/// Greedy shift placement: each shift goes where it covers the most residual expected open hours,
/// one period-hour per period, earliest start on ties.
std::vector<Extraboard> place_report_times(const Instance& inst, int n_xb, int shift_periods = 30);

struct OtRosterSpec {
    int am_count = 3;
    int am_spacing = 4;
    int pm_count = 7;
    int pm_spacing = 2;
    Window am{4, 20};
    Window pm{44, 60};
};

/// Report times on a grid inside each peak window. Throws ContractViolation when a window is too small.
std::vector<OvertimeDriver> gen_ot_roster(const Instance& inst, const OtRosterSpec& spec);

/// Copy with the rosters replaced and ids renumbered densely.
Instance with_roster(const Instance& inst, std::vector<Extraboard> xbs, std::vector<OvertimeDriver> ots);
/// Copy with every source probability multiplied by `scale`. Throws ContractViolation past 1.
Instance scale_probabilities(const Instance& inst, double scale);

std::string gen_params_to_json(const GenParams& p);
/// Overlays the keys present in `text` on `base`. Unknown keys are rejected.
GenParams gen_params_from_json(std::string_view text, GenParams base);

}  // namespace xbadp
