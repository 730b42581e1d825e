#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xbadp/artifacts.hpp"
#include "xbadp/mdp.hpp"
#include "xbadp/policies.hpp"

namespace xbadp {

struct EpochLog {
    Period t = 0;
    Decisions decisions;
    double reward = 0.0;
};

struct EpisodeResult {
    PolicyKind policy = PolicyKind::approx;
    std::uint64_t path_seed = 0;
    double total_reward = 0.0;      ///< covered reward minus surcharge
    double covered_reward = 0.0;
    double uncovered_reward = 0.0;
    double revealed_reward = 0.0;
    double ot_surcharge = 0.0;
    double covered_hours = 0.0;
    double uncovered_hours = 0.0;
    double revealed_hours = 0.0;
    double xb_covered_hours = 0.0;
    double xb_shift_hours = 0.0;    ///< rostered XB hours
    std::vector<int> xb_productive_periods;
    std::vector<int> covered_pieces;    ///< ids in the instance the policy ran on
    std::vector<int> uncovered_pieces;
    std::vector<double> solve_ms;       ///< nontrivial approximate-policy solves only
    int deadline_hits = 0;
    std::vector<EpochLog> log;

    double utilization() const noexcept { return xb_shift_hours > 0.0 ? xb_covered_hours / xb_shift_hours : 0.0; }
};

/// What an episode needs besides the instance and path.
struct EpisodeContext {
    const ValueArtifacts* artifacts = nullptr;  ///< required for the approximate policy
    const Instance* merged = nullptr;           ///< practice method; built on demand when null
    PolicyConfig cfg;
    bool keep_log = false;
};

/// Runs one day. Throws ContractViolation, with the epoch and violations, if a policy emits infeasible decisions.
EpisodeResult run_episode(const Instance& inst, PolicyKind policy, const SamplePath& path, const EpisodeContext& ctx);

struct PolicySummary {
    PolicyKind policy = PolicyKind::approx;
    int n_xb = 0;
    double p_scale = 1.0;
    int n_paths = 0;
    double mean = 0.0;
    double sd = 0.0;
    double cv = 0.0;
    std::optional<double> gap;  ///< (PI mean - mean) / PI mean, when PI ran
    double covered_hours = 0.0;
    double uncovered_hours = 0.0;
    double uncovered_pct = 0.0;  ///< uncovered hours over revealed hours, in percent
    double utilization = 0.0;
    long long solves = 0;
    double slow_solve_frac = 0.0;  ///< nontrivial solves over 0.5 s
    double max_solve_ms = 0.0;
    int deadline_hits = 0;
};

struct MetricsTable {
    std::vector<PolicySummary> rows;
};

struct EvalConfig {
    std::vector<PolicyKind> policies;
    int n_paths = 100;
    std::uint64_t seed = 1;
    double p_scale = 1.0;
    PolicyConfig policy_cfg;
    TrainOptions train;
    bool keep_episodes = true;
};

struct Evaluation {
    std::vector<std::uint64_t> path_seeds;
    std::map<PolicyKind, std::vector<EpisodeResult>> episodes;
    MetricsTable table;
    ValueArtifacts artifacts;
};

/// Path i uses seed derive_seed(seed, {i}); every policy sees the same paths.
std::vector<std::uint64_t> path_seeds(std::uint64_t seed, int n_paths);

/// Scales probabilities by p_scale, trains artifacts on the scaled instance unless supplied (or a cache
/// is given), then runs every policy over the same paths.
Evaluation evaluate(const Instance& inst, const EvalConfig& cfg, const ValueArtifacts* artifacts = nullptr,
                    ArtifactCache* cache = nullptr);

/// Mean and sample standard deviation with compensated summation, in input order.
std::pair<double, double> mean_sd(const std::vector<double>& xs);

PolicySummary summarize(PolicyKind policy, int n_xb, double p_scale, const std::vector<EpisodeResult>& eps,
                        std::optional<double> pi_mean);

}  // namespace xbadp
