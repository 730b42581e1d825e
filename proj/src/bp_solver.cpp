#include "xbadp/bp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "xbadp/errors.hpp"

namespace xbadp {

namespace {

constexpr double kTieEps = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

struct Mask {
    std::vector<std::pair<int, std::uint64_t>> words;  // sparse (word index, bits)

    bool clashes(const std::vector<std::uint64_t>& used) const {
        for (auto [w, b] : words)
            if (used[w] & b) return true;
        return false;
    }
    void set(std::vector<std::uint64_t>& used) const {
        for (auto [w, b] : words) used[w] |= b;
    }
    void clear(std::vector<std::uint64_t>& used) const {
        for (auto [w, b] : words) used[w] &= ~b;
    }
};

struct Choice {
    int code;  // 0 hold, r+1 for option r
    double value;
    Mask mask;
};

struct Driver {
    bool is_xb;
    double v_hld, slope;
    std::vector<Choice> options;  // code >= 1, sorted by descending value (ties by code)
};

class Search {
public:
    Search(const EpochProgram& p, const SolveOptions& opts) : p_(p) {
        std::map<int, int> local;
        for (int k : p.pieces) local.emplace(k, static_cast<int>(local.size()));
        words_ = (static_cast<int>(local.size()) + 63) / 64;
        auto mask_of = [&](const std::vector<int>& ids) {
            std::map<int, std::uint64_t> m;
            for (int k : ids) {
                const int l = local.at(k);
                m[l / 64] |= std::uint64_t{1} << (l % 64);
            }
            return Mask{{m.begin(), m.end()}};
        };
        for (const auto& x : p.xbs) {
            Driver d{true, x.v_hld, x.slope, {}};
            for (std::size_t r = 0; r < x.options.size(); ++r)
                d.options.push_back({static_cast<int>(r) + 1, x.options[r].value(), mask_of(x.options[r].pieces)});
            drivers_.push_back(std::move(d));
        }
        for (const auto& o : p.ots) {
            Driver d{false, o.v_hld, o.slope, {}};
            for (std::size_t r = 0; r < o.options.size(); ++r)
                d.options.push_back({static_cast<int>(r) + 1, o.options[r].net, mask_of({o.options[r].piece})});
            drivers_.push_back(std::move(d));
        }
        for (auto& d : drivers_)
            std::stable_sort(d.options.begin(), d.options.end(),
                             [](const Choice& a, const Choice& b) { return a.value > b.value; });
        n_xb_ = static_cast<int>(p.xbs.size());
        if (opts.deadline_ms) deadline_ = Clock::now() + std::chrono::microseconds(static_cast<long long>(*opts.deadline_ms * 1000));
        used_.assign(words_, 0);
        code_.assign(drivers_.size(), 0);
    }

    EpochSolution run() {
        const bool simple = p_.mode == ProgramMode::simple;
        std::vector<int> ns;
        if (simple) ns.push_back(-1);
        else
            for (int n = 0; n <= n_xb_; ++n) ns.push_back(n);

        // Pass 1: best objective. Hold-everything seeds the incumbent.
        best_code_.assign(drivers_.size(), 0);
        best_ = closed_form(best_code_);
        for (int n : ns) {
            if (stopped_) break;
            set_n(n);
            lex_ = false;
            dfs(0, 0.0, 0);
        }
        if (stopped_) return finish(best_code_, true);

        // Pass 2: lexicographically first assignment within tolerance of the best.
        const double target = best_ - kTieEps;
        std::vector<int> chosen;
        for (int n : ns) {
            set_n(n);
            lex_ = true;
            target_ = target;
            found_ = false;
            dfs(0, 0.0, 0);
            if (stopped_) return finish(best_code_, true);
            if (found_ && (chosen.empty() || found_code_ < chosen)) chosen = found_code_;
        }
        if (chosen.empty()) chosen = best_code_;  // unreachable barring rounding; keep pass-1 result
        return finish(chosen, false);
    }

private:
    void set_n(int n) {
        n_ = n;
        hold_.assign(drivers_.size(), 0.0);
        for (std::size_t d = 0; d < drivers_.size(); ++d) {
            const auto& dr = drivers_[d];
            if (n < 0) hold_[d] = dr.v_hld;
            else if (dr.is_xb) hold_[d] = hold_value(dr.v_hld, dr.slope, (n - 1) / 2.0);
            else hold_[d] = hold_value(dr.v_hld, dr.slope, n);
        }
    }

    double best_option(int d) const {
        for (const auto& c : drivers_[d].options)
            if (!c.mask.clashes(used_)) return c.value;
        return kNegInf;
    }

    /// Upper bound on what drivers d.. can add, given `holds` XBs already holding.
    double bound(int d, int holds) {
        double total = 0.0;
        diffs_.clear();
        int forced = 0;
        for (int q = d; q < static_cast<int>(drivers_.size()); ++q) {
            const double b = best_option(q);
            if (!drivers_[q].is_xb || n_ < 0) {
                total += std::max(hold_[q], b);
                continue;
            }
            if (b == kNegInf) {
                total += hold_[q];
                ++forced;
            } else {
                total += b;
                diffs_.push_back(hold_[q] - b);
            }
        }
        if (n_ >= 0) {
            const int r = n_ - holds - forced;
            if (r < 0 || r > static_cast<int>(diffs_.size())) return kNegInf;
            std::partial_sort(diffs_.begin(), diffs_.begin() + r, diffs_.end(), std::greater<>());
            for (int q = 0; q < r; ++q) total += diffs_[q];
        }
        return total;
    }

    bool out_of_time() {
        if (!deadline_) return false;
        if ((++nodes_ & 255) == 0 && Clock::now() > *deadline_) stopped_ = true;
        return stopped_;
    }

    void dfs(int d, double cur, int holds) {
        if (stopped_) return;
        if (!deadline_) ++nodes_;
        else if (out_of_time()) return;
        if (lex_ && found_) return;
        if (d == static_cast<int>(drivers_.size())) {
            if (n_ >= 0 && holds != n_) return;
            if (lex_) {
                if (cur >= target_) {
                    found_ = true;
                    found_code_ = code_;
                }
            } else if (cur > best_) {
                best_ = cur;
                best_code_ = code_;
            }
            return;
        }
        const double ub = cur + bound(d, holds);
        if (lex_ ? ub < target_ - 1e-12 : ub <= best_ + 1e-12) return;

        const auto& dr = drivers_[d];
        const bool may_hold = !(dr.is_xb && n_ >= 0 && holds >= n_);
        auto try_hold = [&] {
            if (!may_hold) return;
            code_[d] = 0;
            dfs(d + 1, cur + hold_[d], holds + (dr.is_xb ? 1 : 0));
        };
        auto try_option = [&](const Choice& c) {
            if (c.mask.clashes(used_)) return;
            c.mask.set(used_);
            code_[d] = c.code;
            dfs(d + 1, cur + c.value, holds);
            c.mask.clear(used_);
        };
        if (lex_) {
            try_hold();
            // Natural option order for the tie rule.
            order_buf_.resize(dr.options.size());
            for (std::size_t r = 0; r < dr.options.size(); ++r) order_buf_[dr.options[r].code - 1] = &dr.options[r];
            const std::vector<const Choice*> order = order_buf_;
            for (const Choice* c : order) {
                if (found_ || stopped_) break;
                try_option(*c);
            }
        } else {
            bool held = false;
            for (const auto& c : dr.options) {
                if (!held && hold_[d] >= c.value) {
                    try_hold();
                    held = true;
                }
                try_option(c);
            }
            if (!held) try_hold();
        }
        code_[d] = 0;
    }

    std::pair<std::vector<int>, std::vector<int>> split(const std::vector<int>& code) const {
        std::vector<int> xb(code.begin(), code.begin() + n_xb_), ot(code.begin() + n_xb_, code.end());
        for (auto& c : xb) --c;
        for (auto& c : ot) --c;
        return {xb, ot};
    }

    double closed_form(const std::vector<int>& code) const {
        auto [xb, ot] = split(code);
        return evaluate_objective(p_, xb, ot);
    }

    EpochSolution finish(const std::vector<int>& code, bool hit) const {
        EpochSolution s;
        std::tie(s.xb_choice, s.ot_choice) = split(code);
        s.objective = evaluate_objective(p_, s.xb_choice, s.ot_choice);
        for (std::size_t q = 0; q < s.xb_choice.size(); ++q)
            if (s.xb_choice[q] >= 0)
                for (int k : p_.xbs[q].options[s.xb_choice[q]].pieces) s.covered.push_back(k);
        for (std::size_t q = 0; q < s.ot_choice.size(); ++q)
            if (s.ot_choice[q] >= 0) s.covered.push_back(p_.ots[q].options[s.ot_choice[q]].piece);
        std::sort(s.covered.begin(), s.covered.end());
        s.deadline_hit = hit;
        s.nodes = nodes_;
        return s;
    }

    const EpochProgram& p_;
    std::vector<Driver> drivers_;
    int n_xb_ = 0;
    int words_ = 0;
    int n_ = -1;
    std::vector<double> hold_;
    std::vector<std::uint64_t> used_;
    std::vector<int> code_;
    std::vector<double> diffs_;
    std::vector<const Choice*> order_buf_;
    bool lex_ = false;
    double best_ = kNegInf;
    std::vector<int> best_code_;
    double target_ = 0.0;
    bool found_ = false;
    std::vector<int> found_code_;
    std::optional<Clock::time_point> deadline_;
    bool stopped_ = false;
    long long nodes_ = 0;
};

}  // namespace

double hold_value(double v_hld, double slope, double position) noexcept {
    return std::max(slope * position + v_hld, 0.0);
}

double evaluate_objective(const EpochProgram& p, const std::vector<int>& xb_choice, const std::vector<int>& ot_choice) {
    if (xb_choice.size() != p.xbs.size() || ot_choice.size() != p.ots.size())
        throw ContractViolation("evaluate_objective: decision vector has the wrong length");
    std::set<int> used;
    auto claim = [&](int k) {
        if (!used.insert(k).second) throw ContractViolation("evaluate_objective: piece " + std::to_string(k) + " covered twice");
    };
    int n_hld = 0;
    double total = 0.0;
    for (std::size_t q = 0; q < p.xbs.size(); ++q) {
        const int c = xb_choice[q];
        if (c < 0) {
            ++n_hld;
            continue;
        }
        const auto& o = p.xbs[q].options.at(c);
        for (int k : o.pieces) claim(k);
        total += o.immediate + o.future;
    }
    for (std::size_t q = 0; q < p.ots.size(); ++q) {
        const int c = ot_choice[q];
        if (c < 0) continue;
        const auto& o = p.ots[q].options.at(c);
        claim(o.piece);
        total += o.net;
    }
    const bool simple = p.mode == ProgramMode::simple;
    for (std::size_t q = 0; q < p.xbs.size(); ++q)
        if (xb_choice[q] < 0)
            total += simple ? p.xbs[q].v_hld : hold_value(p.xbs[q].v_hld, p.xbs[q].slope, (n_hld - 1) / 2.0);
    for (std::size_t q = 0; q < p.ots.size(); ++q)
        if (ot_choice[q] < 0) total += simple ? p.ots[q].v_hld : hold_value(p.ots[q].v_hld, p.ots[q].slope, n_hld);
    return total;
}

std::vector<std::string> validate_program(const EpochProgram& p) {
    std::vector<std::string> v;
    const std::set<int> universe(p.pieces.begin(), p.pieces.end());
    if (universe.size() != p.pieces.size()) v.push_back("program: duplicate piece in universe");
    auto check_value = [&](double x, const std::string& what) {
        if (!std::isfinite(x)) v.push_back(what + ": not finite");
    };
    for (std::size_t q = 0; q < p.xbs.size(); ++q) {
        const auto& x = p.xbs[q];
        const std::string tag = "xb entry " + std::to_string(q);
        if (x.v_hld < 0.0) v.push_back(tag + ": negative hold value");
        if (x.slope > 0.0) v.push_back(tag + ": positive loss slope");
        check_value(x.v_hld, tag);
        check_value(x.slope, tag);
        for (const auto& o : x.options) {
            if (o.pieces.empty()) v.push_back(tag + ": empty option");
            for (int k : o.pieces)
                if (!universe.count(k)) v.push_back(tag + ": piece " + std::to_string(k) + " outside universe");
            check_value(o.immediate, tag);
            check_value(o.future, tag);
        }
    }
    for (std::size_t q = 0; q < p.ots.size(); ++q) {
        const auto& o = p.ots[q];
        const std::string tag = "ot entry " + std::to_string(q);
        if (o.v_hld < 0.0) v.push_back(tag + ": negative hold value");
        if (o.slope > 0.0) v.push_back(tag + ": positive loss slope");
        check_value(o.v_hld, tag);
        check_value(o.slope, tag);
        for (const auto& op : o.options) {
            if (!universe.count(op.piece)) v.push_back(tag + ": piece " + std::to_string(op.piece) + " outside universe");
            check_value(op.net, tag);
        }
    }
    return v;
}

namespace {
void require_valid(const EpochProgram& p, const char* op) {
    auto v = validate_program(p);
    if (v.empty()) return;
    std::string msg = std::string(op) + ": invalid program";
    for (const auto& line : v) msg += "; " + line;
    throw ContractViolation(msg);
}
}  // namespace

EpochSolution solve_exact(const EpochProgram& p, const SolveOptions& opts) {
    require_valid(p, "solve_exact");
    Search search(p, opts);
    return search.run();
}

EpochSolution enumerate_oracle(const EpochProgram& p, long long cap) {
    require_valid(p, "enumerate_oracle");
    std::vector<int> radix;
    for (const auto& x : p.xbs) radix.push_back(static_cast<int>(x.options.size()) + 1);
    for (const auto& o : p.ots) radix.push_back(static_cast<int>(o.options.size()) + 1);
    long long total = 1;
    for (int r : radix) {
        total *= r;
        if (total > cap) throw ContractViolation("enumerate_oracle: too many combinations");
    }
    const std::size_t nx = p.xbs.size();
    auto decode = [&](long long idx, std::vector<int>& xb, std::vector<int>& ot) {
        // Most significant digit first, so increasing idx walks decision vectors in lexicographic order.
        std::vector<int> code(radix.size());
        for (std::size_t q = radix.size(); q-- > 0;) {
            code[q] = static_cast<int>(idx % radix[q]);
            idx /= radix[q];
        }
        xb.assign(code.begin(), code.begin() + nx);
        ot.assign(code.begin() + nx, code.end());
        for (auto& c : xb) --c;
        for (auto& c : ot) --c;
    };
    auto objective = [&](const std::vector<int>& xb, const std::vector<int>& ot, double& out) {
        try {
            out = evaluate_objective(p, xb, ot);
            return true;
        } catch (const ContractViolation&) {
            return false;
        }
    };
    std::vector<int> xb, ot;
    double best = kNegInf;
    for (long long idx = 0; idx < total; ++idx) {
        decode(idx, xb, ot);
        double v;
        if (objective(xb, ot, v)) best = std::max(best, v);
    }
    for (long long idx = 0; idx < total; ++idx) {
        decode(idx, xb, ot);
        double v;
        if (objective(xb, ot, v) && v >= best - kTieEps) {
            EpochSolution s;
            s.xb_choice = xb;
            s.ot_choice = ot;
            s.objective = v;
            for (std::size_t q = 0; q < xb.size(); ++q)
                if (xb[q] >= 0)
                    for (int k : p.xbs[q].options[xb[q]].pieces) s.covered.push_back(k);
            for (std::size_t q = 0; q < ot.size(); ++q)
                if (ot[q] >= 0) s.covered.push_back(p.ots[q].options[ot[q]].piece);
            std::sort(s.covered.begin(), s.covered.end());
            s.nodes = total;
            return s;
        }
    }
    throw ContractViolation("enumerate_oracle: no feasible assignment");  // hold-all is always feasible
}

std::string program_to_json(const EpochProgram& p) {
    using nlohmann::json;
    json doc;
    doc["mode"] = p.mode == ProgramMode::simple ? "simple" : "oversupply";
    doc["n_max"] = p.n_max;
    doc["pieces"] = p.pieces;
    json xbs = json::array(), ots = json::array();
    for (const auto& x : p.xbs) {
        json opts = json::array();
        for (const auto& o : x.options)
            opts.push_back({{"pieces", o.pieces}, {"immediate", o.immediate}, {"future", o.future}});
        xbs.push_back({{"driver", x.driver}, {"v_hld", x.v_hld}, {"slope", x.slope}, {"options", opts}});
    }
    for (const auto& o : p.ots) {
        json opts = json::array();
        for (const auto& op : o.options) opts.push_back({{"piece", op.piece}, {"net", op.net}});
        ots.push_back({{"driver", o.driver}, {"v_hld", o.v_hld}, {"slope", o.slope}, {"options", opts}});
    }
    doc["xbs"] = std::move(xbs);
    doc["ots"] = std::move(ots);
    return doc.dump();
}

}  // namespace xbadp
