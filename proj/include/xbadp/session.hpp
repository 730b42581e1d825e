#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "xbadp/artifacts.hpp"
#include "xbadp/mdp.hpp"
#include "xbadp/policies.hpp"

namespace xbadp {

/// Error with an HTTP status and a machine-readable code.
class SessionError : public std::runtime_error {
public:
    SessionError(int status, std::string code, const std::string& message, std::vector<std::string> details = {})
        : std::runtime_error(message), status_(status), code_(std::move(code)), details_(std::move(details)) {}
    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    int status_;
    std::string code_;
    std::vector<std::string> details_;
};

enum class ClockMode { manual, auto_sample };

struct SessionOptions {
    PolicyKind policy = PolicyKind::approx;  ///< approx, myopic_xb_first or myopic_ot_first
    PolicyConfig cfg;
    ClockMode clock = ClockMode::manual;
    std::uint64_t seed = 0;
    double p_scale = 1.0;
};

struct SessionEvent {
    enum class Kind { reveal, commit, advance };
    Kind kind = Kind::reveal;
    Period t = 0;
    std::vector<int> pieces;  ///< reveal and advance: newly revealed piece ids
    Decisions decisions;      ///< commit only
    double reward = 0.0;      ///< commit only
};

/// Running totals in the same units as EpisodeResult.
struct SessionMetrics {
    int commits = 0;
    double total_reward = 0.0;
    double covered_reward = 0.0;
    double ot_surcharge = 0.0;
    double covered_hours = 0.0;
    double revealed_reward = 0.0;
    double revealed_hours = 0.0;
    double uncovered_reward = 0.0;  ///< pieces that reached their start uncovered
    double uncovered_hours = 0.0;
    std::vector<int> xb_productive_periods;
};

/// One live dispatch day. Not thread-safe; the service serializes access.
class Session {
public:
    Session(std::string id, Instance inst, std::shared_ptr<const ValueArtifacts> artifacts, SessionOptions opts,
            const std::vector<int>& initial_pieces = {});

    const std::string& id() const noexcept { return id_; }
    long long version() const noexcept { return version_; }
    bool closed() const noexcept { return closed_; }
    const State& state() const noexcept { return state_; }
    const Instance& instance() const noexcept { return inst_; }
    const std::string& hash() const noexcept { return hash_; }
    const std::vector<SessionEvent>& log() const noexcept { return log_; }
    const SessionMetrics& metrics() const noexcept { return metrics_; }

    /// Resolves source ids to their pieces and merges with explicit piece ids. Throws 422 on unknown ids.
    std::vector<int> resolve(const std::vector<int>& pieces, const std::vector<int>& sources) const;

    nlohmann::json reveal(const std::vector<int>& pieces);
    nlohmann::json recommendation();
    /// Recommendation for a copy of the session with `pieces` also revealed. Leaves this session untouched.
    nlohmann::json preview(const std::vector<int>& pieces) const;
    nlohmann::json commit(const Decisions& d);
    /// `next` must be absent in auto-clock mode; there the session path supplies W(t+1).
    nlohmann::json advance(const std::optional<std::vector<int>>& next);

    nlohmann::json state_json() const;
    nlohmann::json values_json(std::optional<int> xb, std::optional<int> ot) const;
    nlohmann::json metrics_json() const;
    nlohmann::json log_json() const;

private:
    void require_open() const;
    void check_reveal(const std::vector<int>& pieces, Period earliest) const;
    void add_revealed(const std::vector<int>& pieces);
    nlohmann::json recommend_now() const;

    std::string id_;
    Instance inst_;
    std::string hash_;
    std::shared_ptr<const ValueArtifacts> art_;
    SessionOptions opts_;
    std::optional<SamplePath> path_;
    State state_;
    std::set<int> revealed_;
    std::vector<SessionEvent> log_;
    SessionMetrics metrics_;
    long long version_ = 0;
    bool closed_ = false;
    std::optional<std::pair<long long, nlohmann::json>> pending_;
};

/// Re-applies a session log from t = 0.
State replay_log(const Instance& inst, const std::vector<SessionEvent>& log);

nlohmann::json decisions_to_json(const Decisions& d);
/// {"xb": [{"driver": j, "pieces": [...]}], "ot": [{"driver": i, "piece": k}]}. Throws SessionError 400.
Decisions decisions_from_json(const nlohmann::json& j);

std::vector<SessionEvent> log_from_json(const nlohmann::json& j);

}  // namespace xbadp
