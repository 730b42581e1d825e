#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "xbadp/loss_training.hpp"
#include "xbadp/value_training.hpp"

namespace xbadp {

/// Trained tables for one instance, indexed by roster id.
struct ValueArtifacts {
    std::string instance_hash;
    int n_max = 1;
    std::vector<XbValueTable> xb_tables;
    std::vector<OtValueTable> ot_tables;
    std::vector<XbLossTable> xb_losses;  ///< empty when losses were not trained
    std::vector<OtLossTable> ot_losses;

    bool has_losses() const noexcept { return !xb_losses.empty() || !ot_losses.empty(); }
    double xb_loss(int j, Period t) const noexcept { return j < (int)xb_losses.size() ? xb_losses[j].at(t) : 0.0; }
    double ot_loss(int i, Period t) const noexcept { return i < (int)ot_losses.size() ? ot_losses[i].at(t) : 0.0; }

    friend bool operator==(const ValueArtifacts&, const ValueArtifacts&) = default;
};

struct TrainOptions {
    LossOptions loss;
    bool train_losses = true;
};

/// Tables shared between rosters with the same shifts. Values depend on (s, e) only, losses also on n_max.
/// Only valid for one fixed set of pieces and sources.
class ArtifactCache {
public:
    const XbValueTable& xb_values(const Instance& inst, Period s, Period e);
    const OtValueTable& ot_values(const Instance& inst, Period s);
    const XbLossTable& xb_loss(const Instance& inst, Period s, Period e, int n_max, const LossOptions& opts);
    const OtLossTable& ot_loss(const Instance& inst, Period s, int n_max, const LossOptions& opts);

    std::size_t size() const noexcept { return xbv_.size() + otv_.size() + xbl_.size() + otl_.size(); }

private:
    std::map<std::pair<Period, Period>, XbValueTable> xbv_;
    std::map<Period, OtValueTable> otv_;
    std::map<std::tuple<Period, Period, int, std::uint64_t>, XbLossTable> xbl_;
    std::map<std::tuple<Period, int, std::uint64_t>, OtLossTable> otl_;
};

/// Trains every roster member. Duplicate shifts are trained once.
ValueArtifacts train_artifacts(const Instance& inst, const TrainOptions& opts, ArtifactCache* cache = nullptr);

/// Trains tables for every feasible report time: XB shifts of `shift_periods` starting in [0, T - shift_periods],
/// OTs reporting in [0, T - δ_ot - 1]. Fills `cache` so later train_artifacts calls are lookups.
void train_planning_period(const Instance& inst, int shift_periods, int n_max, const TrainOptions& opts,
                           ArtifactCache& cache);

std::string save_artifacts(const ValueArtifacts& a);
ValueArtifacts load_artifacts(std::string_view text);

/// Throws ContractViolation unless `a` was trained for `inst` and covers its roster.
void check_artifacts(const ValueArtifacts& a, const Instance& inst, const std::string& inst_hash);

}  // namespace xbadp
