#include "xbadp/perfect_info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

namespace xbadp {

namespace {

// Exact search over pieces in start order, memoized on what the future can see: for each XB how long it
// stays busy past the current start (or that it is finished), and which OTs with a live window are used.
class PiSearch {
public:
    PiSearch(const Instance& inst, std::vector<int> pieces) : inst_(inst), ids_(std::move(pieces)) {
        std::sort(ids_.begin(), ids_.end(), [&](int x, int y) {
            const auto& a = inst.pieces[x];
            const auto& b = inst.pieces[y];
            return a.start != b.start ? a.start < b.start : x < y;
        });
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
        K_ = static_cast<int>(ids_.size());
        J_ = static_cast<int>(inst.xbs.size());
        I_ = static_cast<int>(inst.ots.size());
        xb_ok_.assign(J_, std::vector<char>(K_, 0));
        for (int j = 0; j < J_; ++j)
            for (int q = 0; q < K_; ++q) xb_ok_[j][q] = xb_eligible(inst.xbs[j], P(q));
        ot_net_.assign(I_, std::vector<double>(K_, -1.0));
        for (int i = 0; i < I_; ++i)
            for (int q = 0; q < K_; ++q)
                if (ot_eligible(inst.ots[i], P(q), inst.delta_ot)) ot_net_[i][q] = ot_net_value(inst, inst.ots[i], P(q));
        // first_at_[j][t]: first eligible position for j starting at or after t; first_pos_[j][q]: at or after q.
        Period horizon = 0;
        for (int q = 0; q < K_; ++q) horizon = std::max(horizon, P(q).last() + 2);
        for (const auto& x : inst.xbs) horizon = std::max(horizon, x.start + 1);
        first_at_.assign(J_, std::vector<int>(horizon + 1, K_));
        first_pos_.assign(J_, std::vector<int>(K_ + 1, K_));
        for (int j = 0; j < J_; ++j) {
            for (int q = K_ - 1; q >= 0; --q) first_pos_[j][q] = xb_ok_[j][q] ? q : first_pos_[j][q + 1];
            int q = K_;
            for (Period t = horizon; t >= 0; --t) {
                while (q > 0 && P(q - 1).start >= t) --q;
                first_at_[j][t] = first_pos_[j][q];
            }
        }
        next_.resize(K_);
        for (int q = 0; q < K_; ++q) {
            next_[q] = q + 1;
            while (next_[q] < K_ && P(next_[q]).start <= P(q).last()) ++next_[q];
        }
        ot_last_.assign(I_, -1);
        for (int i = 0; i < I_; ++i)
            for (int q = 0; q < K_; ++q)
                if (ot_net_[i][q] > 0.0) ot_last_[i] = q;
    }

    PiResult run() {
        PiResult res;
        greedy();
        lambda_.assign(K_, 0.0);
        tune_multipliers();
        build_suffix_tables();
        free_.resize(J_);
        for (int j = 0; j < J_; ++j) free_[j] = inst_.xbs[j].start;
        ot_used_.assign(I_, 0);
        res.reward = solve(0, -kInf);
        // Walk the memo forward to recover one optimal assignment.
        for (int q = 0; q < K_; ++q) {
            const int c = best_move(q);
            if (c >= 0 && c < J_) {
                res.xb_pieces[c].push_back(ids_[q]);
                free_[c] = P(q).last() + 1;
            } else if (c >= J_) {
                res.ot_piece[c - J_] = ids_[q];
                ot_used_[c - J_] = 1;
            }
        }
        res.nodes = static_cast<long long>(memo_.size());
        return res;
    }

private:
    static constexpr int kDrop = -1;
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    const WorkPiece& P(int q) const { return inst_.pieces[ids_[q]]; }

    /// Chronological first-fit: earliest-ending free XB, else the best-paying OT. Seeds the multiplier step.
    void greedy() {
        std::vector<Period> f(J_);
        for (int j = 0; j < J_; ++j) f[j] = inst_.xbs[j].start;
        std::vector<char> used(I_, 0);
        incumbent_ = 0.0;
        for (int q = 0; q < K_; ++q) {
            int pick = -1;
            for (int j = 0; j < J_; ++j)
                if (xb_ok_[j][q] && f[j] <= P(q).start && (pick < 0 || inst_.xbs[j].end < inst_.xbs[pick].end)) pick = j;
            if (pick >= 0) {
                f[pick] = P(q).last() + 1;
                incumbent_ += P(q).reward;
                continue;
            }
            int ot = -1;
            for (int i = 0; i < I_; ++i)
                if (!used[i] && ot_net_[i][q] > 0.0 && (ot < 0 || ot_net_[i][q] > ot_net_[ot][q])) ot = i;
            if (ot >= 0) {
                used[ot] = 1;
                incumbent_ += ot_net_[ot][q];
            }
        }
    }

    /// Relaxed value with pieces priced at lam; optionally reports how many drivers take each piece.
    double relaxed(const std::vector<double>& lam, std::vector<int>* uses) const {
        double total = std::accumulate(lam.begin(), lam.end(), 0.0);
        std::vector<double> S(K_ + 1);
        std::vector<char> take(K_);
        for (int j = 0; j < J_; ++j) {
            S[K_] = 0.0;
            for (int q = K_ - 1; q >= 0; --q) {
                S[q] = S[q + 1];
                take[q] = 0;
                if (!xb_ok_[j][q]) continue;
                const double w = P(q).reward - lam[q] + S[next_[q]];
                if (w > S[q]) {
                    S[q] = w;
                    take[q] = 1;
                }
            }
            total += S[0];
            if (uses)
                for (int q = 0; q < K_;) {
                    if (take[q]) {
                        ++(*uses)[q];
                        q = next_[q];
                    } else {
                        ++q;
                    }
                }
        }
        for (int i = 0; i < I_; ++i) {
            double best = 0.0;
            int arg = -1;
            for (int q = 0; q < K_; ++q)
                if (ot_net_[i][q] > 0.0 && ot_net_[i][q] - lam[q] > best) {
                    best = ot_net_[i][q] - lam[q];
                    arg = q;
                }
            total += best;
            if (uses && arg >= 0) ++(*uses)[arg];
        }
        return total;
    }

    /// Subgradient descent on the multipliers of "each piece covered at most once".
    void tune_multipliers() {
        std::vector<double> lam(K_, 0.0);
        std::vector<int> uses(K_);
        double best_bound = relaxed(lam, nullptr);
        lambda_ = lam;
        double theta = 1.0;
        int stale = 0;
        for (int it = 0; it < 150 && best_bound - incumbent_ > 1e-9; ++it) {
            std::fill(uses.begin(), uses.end(), 0);
            const double L = relaxed(lam, &uses);
            if (L < best_bound - 1e-12) {
                best_bound = L;
                lambda_ = lam;
                stale = 0;
            } else if (++stale >= 5) {
                theta *= 0.5;
                stale = 0;
            }
            double norm = 0.0;
            for (int q = 0; q < K_; ++q) norm += double(1 - uses[q]) * (1 - uses[q]);
            if (norm == 0.0) break;
            const double step = theta * (L - incumbent_) / norm;
            for (int q = 0; q < K_; ++q) lam[q] = std::max(0.0, lam[q] - step * (1 - uses[q]));
        }
    }

    void build_suffix_tables() {
        lam_suffix_.assign(K_ + 1, 0.0);
        for (int q = K_ - 1; q >= 0; --q) lam_suffix_[q] = lam_suffix_[q + 1] + lambda_[q];
        S_.assign(J_, std::vector<double>(K_ + 1, 0.0));
        for (int j = 0; j < J_; ++j)
            for (int q = K_ - 1; q >= 0; --q) {
                S_[j][q] = S_[j][q + 1];
                if (xb_ok_[j][q]) S_[j][q] = std::max(S_[j][q], P(q).reward - lambda_[q] + S_[j][next_[q]]);
            }
        M_.assign(I_, std::vector<double>(K_ + 1, 0.0));
        for (int i = 0; i < I_; ++i)
            for (int q = K_ - 1; q >= 0; --q) {
                M_[i][q] = M_[i][q + 1];
                if (ot_net_[i][q] > 0.0) M_[i][q] = std::max(M_[i][q], ot_net_[i][q] - lambda_[q]);
            }
    }

    int first_free(int j, int pos) const {
        const auto& fa = first_at_[j];
        const Period f = std::min<Period>(std::max(free_[j], P(pos).start), static_cast<Period>(fa.size()) - 1);
        return std::max(fa[f], first_pos_[j][pos]);
    }

    /// Lagrangian upper bound on solve(pos) for the current state.
    double bound(int pos) const {
        if (pos == K_) return 0.0;
        double total = lam_suffix_[pos];
        for (int j = 0; j < J_; ++j) total += S_[j][first_free(j, pos)];
        for (int i = 0; i < I_; ++i)
            if (!ot_used_[i]) total += M_[i][pos];
        return total;
    }

    /// Only which remaining eligible pieces an XB can still start matters, so its free time is rounded up to
    /// the next such position.
    void key(int pos, std::string& k) const {
        k.clear();
        k.push_back(static_cast<char>(pos & 0xff));
        k.push_back(static_cast<char>(pos >> 8));
        for (int j = 0; j < J_; ++j) {
            const int q = first_free(j, pos) - pos;
            k.push_back(static_cast<char>(q & 0xff));
            k.push_back(static_cast<char>(q >> 8));
        }
        for (int i = 0; i < I_; ++i) k.push_back(ot_used_[i] || ot_last_[i] < pos);
    }

    /// Moves worth branching on at pos: one XB per distinct (shift end, free time), one OT per report time.
    std::vector<int> moves(int pos) const {
        const auto& k = P(pos);
        std::vector<int> out;
        for (int j = 0; j < J_; ++j) {
            if (!xb_ok_[j][pos] || free_[j] > k.start) continue;
            const Period fj = std::max(free_[j], k.start);
            const bool dup = std::any_of(out.begin(), out.end(), [&](int o) {
                return inst_.xbs[o].end == inst_.xbs[j].end && std::max(free_[o], k.start) == fj;
            });
            if (!dup) out.push_back(j);
        }
        for (int i = 0; i < I_; ++i) {
            if (ot_used_[i] || ot_net_[i][pos] <= 0.0) continue;
            const bool dup = std::any_of(out.begin(), out.end(),
                                         [&](int o) { return o >= J_ && inst_.ots[o - J_].start == inst_.ots[i].start; });
            if (!dup) out.push_back(J_ + i);
        }
        out.push_back(kDrop);
        return out;
    }

    double gain(int pos, int move) const {
        if (move == kDrop) return 0.0;
        return move < J_ ? P(pos).reward : ot_net_[move - J_][pos];
    }

    static double slack(double x) { return 1e-9 * (1.0 + std::abs(x)); }

    double optimistic(int pos, int move) {
        const double g = gain(pos, move);
        Period saved = 0;
        if (move >= 0 && move < J_) {
            saved = free_[move];
            free_[move] = P(pos).last() + 1;
        } else if (move >= J_) {
            ot_used_[move - J_] = 1;
        }
        const double v = g + bound(pos + 1);
        if (move >= 0 && move < J_) free_[move] = saved;
        else if (move >= J_) ot_used_[move - J_] = 0;
        return v;
    }

    /// Value of `move` at pos, exact when it exceeds `floor`; otherwise an upper bound no larger than `floor`.
    double apply_and_solve(int pos, int move, double floor) {
        const double g = gain(pos, move);
        Period saved = 0;
        if (move >= 0 && move < J_) {
            saved = free_[move];
            free_[move] = P(pos).last() + 1;
        } else if (move >= J_) {
            ot_used_[move - J_] = 1;
        }
        double v = g + bound(pos + 1);
        v += slack(v);
        if (v > floor) v = g + solve(pos + 1, floor - g);
        if (move >= 0 && move < J_) free_[move] = saved;
        else if (move >= J_) ot_used_[move - J_] = 0;
        return v;
    }

    /// Best value from pos in the current state, exact when it exceeds `floor`; otherwise an upper bound no
    /// larger than `floor`. Memo entries remember which of the two they hold.
    double solve(int pos, double floor) {
        if (pos == K_) return 0.0;
        std::string k;
        key(pos, k);
        auto it = memo_.find(k);
        if (it != memo_.end() && (it->second.exact || it->second.value <= floor)) return it->second.value;
        // Most promising move first, by its bound.
        auto ms = moves(pos);
        std::vector<std::pair<double, int>> order;
        for (int m : ms) order.emplace_back(-optimistic(pos, m), m);
        std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        double best = -kInf;
        for (const auto& [ub, m] : order) best = std::max(best, apply_and_solve(pos, m, std::max(floor, best)));
        const Entry e{best, best > floor};
        if (it != memo_.end()) it->second = e;
        else memo_.emplace(std::move(k), e);
        return best;
    }

    /// First move (in branching order) that attains the optimum.
    int best_move(int pos) {
        const double target = solve(pos, -kInf);
        for (int m : moves(pos))
            if (apply_and_solve(pos, m, target - slack(target)) > target - slack(target)) return m;
        return kDrop;
    }

    struct Entry {
        double value;
        bool exact;
    };

    const Instance& inst_;
    std::vector<int> ids_;
    int K_ = 0, J_ = 0, I_ = 0;
    std::vector<std::vector<char>> xb_ok_;
    std::vector<std::vector<double>> ot_net_;
    std::vector<std::vector<int>> first_at_, first_pos_;
    std::vector<int> next_;  ///< first position starting after a piece ends
    std::vector<double> lambda_, lam_suffix_;
    std::vector<std::vector<double>> S_, M_;
    double incumbent_ = 0.0;
    std::vector<int> ot_last_;               ///< last position an OT can profitably take, -1 if none
    std::vector<Period> free_;
    std::vector<char> ot_used_;
    std::unordered_map<std::string, Entry> memo_;
};

}  // namespace

PiResult pi_solve_pieces(const Instance& inst, const std::vector<int>& pieces) {
    return PiSearch(inst, pieces).run();
}

PiResult pi_solve(const Instance& inst, const SamplePath& path) {
    std::vector<int> all;
    for (const auto& r : path.reveals) all.insert(all.end(), r.begin(), r.end());
    return pi_solve_pieces(inst, all);
}

}  // namespace xbadp
