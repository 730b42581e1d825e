#include "xbadp/instance_gen.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "xbadp/rng.hpp"

namespace xbadp {

GenParams miway_params() {
    GenParams p;
    p.routes = {
        {ServicePattern::peaked, 4, 6, true, false},  {ServicePattern::peaked, 5, 7, true, false},
        {ServicePattern::peaked, 6, 8, true, false},  {ServicePattern::flat, 6, 9, true, false},
        {ServicePattern::flat, 7, 10, true, false},   {ServicePattern::flat, 8, 11, true, false},
        {ServicePattern::peaked, 4, 8, true, false},
    };
    return p;
}

GenParams synthetic_params() {
    GenParams p;
    p.routes = {
        {ServicePattern::peak_only, 5, 7, false, false}, {ServicePattern::peak_only, 6, 8, false, false},
        {ServicePattern::flat, 8, 12, false, true},      {ServicePattern::flat, 9, 13, false, true},
        {ServicePattern::peaked, 5, 8, true, false},     {ServicePattern::peaked, 6, 9, true, false},
        {ServicePattern::peaked, 7, 10, true, false},    {ServicePattern::peaked, 8, 12, true, false},
        {ServicePattern::flat, 6, 10, false, false},     {ServicePattern::flat, 7, 11, false, false},
        {ServicePattern::flat, 9, 13, false, false},     {ServicePattern::flat, 10, 15, false, false},
        {ServicePattern::flat, 5, 9, false, false},
    };
    p.straight8 = 180;
    p.straight10 = 40;
    p.split = 34;
    p.part_time = 28;
    p.extra_open_hours = 108.0;
    return p;
}

namespace {

struct Run {
    int route;
    SourceKind kind;
    std::vector<std::pair<Period, Period>> sessions;  // [start, end) per session
};

int uniform_int(Rng& rng, int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

std::vector<int> routes_where(const GenParams& p, auto pred) {
    std::vector<int> out;
    for (int r = 0; r < static_cast<int>(p.routes.size()); ++r)
        if (pred(p.routes[r])) out.push_back(r);
    return out;
}

int pick_round_robin(const std::vector<int>& pool, int n, const char* what) {
    if (pool.empty()) throw ContractViolation(std::string("generator: no route can host ") + what);
    return pool[n % pool.size()];
}

/// Cuts [start, end) into consecutive round trips of the route's durations. A tail too long for one trip but too
/// short for two is split evenly, so no piece exceeds the route's longest trip.
std::vector<std::pair<Period, int>> cut_session(Period start, Period end, const RouteSpec& route, Rng& rng) {
    std::vector<std::pair<Period, int>> out;
    Period t = start;
    const int lo = route.rt_min, hi = route.rt_max;
    while (t < end) {
        const int left = end - t;
        int d;
        if (left <= hi) d = left;
        else if (left < 2 * lo) d = left / 2;
        else d = uniform_int(rng, lo, std::min(hi, left - lo));
        out.emplace_back(t, d);
        t += d;
    }
    return out;
}

}  // namespace

Instance generate_instance(const GenParams& p) {
    if (p.T <= 0 || p.period_minutes <= 0) throw ContractViolation("generator: horizon must be positive");
    if (!(p.absence_p >= 0.0 && p.absence_p <= 1.0)) throw ContractViolation("generator: absence probability outside [0,1]");
    for (const auto& r : p.routes)
        if (r.rt_min < 1 || r.rt_max < r.rt_min) throw ContractViolation("generator: bad round-trip range");
    Rng rng(derive_seed(p.seed, {0x67656e}));

    const auto any_regular = routes_where(p, [](const RouteSpec& r) { return r.pattern != ServicePattern::peak_only; });
    const auto long_routes = routes_where(p, [](const RouteSpec& r) { return r.long_runs; });
    const auto peaked = routes_where(p, [](const RouteSpec& r) { return r.pattern == ServicePattern::peaked; });
    const auto peak_only = routes_where(p, [](const RouteSpec& r) { return r.pattern == ServicePattern::peak_only; });
    const auto flat8 = routes_where(p, [](const RouteSpec& r) { return r.pattern != ServicePattern::peak_only && !r.long_runs; });

    std::vector<Run> runs;
    auto straight = [&](int route, int len) {
        const Period s = uniform_int(rng, 0, std::max(0, p.T - len));
        runs.push_back({route, SourceKind::straight_run, {{s, std::min(p.T, s + len)}}});
    };
    for (int n = 0; n < p.straight8; ++n) straight(pick_round_robin(flat8.empty() ? any_regular : flat8, n, "8-hour runs"), 32);
    for (int n = 0; n < p.straight10; ++n) straight(pick_round_robin(long_routes.empty() ? any_regular : long_routes, n, "10-hour runs"), 40);
    for (int n = 0; n < p.split; ++n) {
        const int route = pick_round_robin(peaked.empty() ? any_regular : peaked, n, "split runs");
        const Period a1 = std::max(0, p.am.start + uniform_int(rng, -3, 2));
        const Period a2 = std::min(p.T, a1 + uniform_int(rng, 9, 12));
        const Period b1 = std::max(a2 + 1, p.pm.start + uniform_int(rng, -2, 3));
        const Period b2 = std::min(p.T, b1 + uniform_int(rng, 9, 12));
        runs.push_back({route, SourceKind::split_run, {{a1, a2}, {b1, b2}}});
    }
    for (int n = 0; n < p.part_time; ++n) {
        const int route = pick_round_robin(peak_only.empty() ? any_regular : peak_only, n / 2, "part-time runs");
        const Window w = n % 2 == 0 ? p.am : p.pm;
        const int len = uniform_int(rng, 20, 24);
        const Period lo = std::max(0, w.start - 4);
        const Period hi = std::max(lo, std::min(p.T - len, w.end + 4 - len));
        const Period s = uniform_int(rng, lo, hi);
        runs.push_back({route, SourceKind::straight_run, {{s, s + len}}});
    }

    Instance inst;
    inst.T = p.T;
    inst.period_minutes = p.period_minutes;
    inst.delta_ot = p.delta_ot;
    inst.c_ot = p.c_ot;
    const double hours = inst.period_hours();

    // Buses in service per route and period, from the regular runs.
    std::vector<std::vector<int>> buses(p.routes.size(), std::vector<int>(p.T, 0));
    for (const auto& run : runs) {
        WorkSource h;
        h.id = static_cast<int>(inst.sources.size());
        h.p = p.absence_p;
        h.kind = run.kind;
        h.label = "run " + std::to_string(h.id) + " route " + std::to_string(run.route);
        for (const auto& [a, b] : run.sessions) {
            if (run.kind == SourceKind::split_run && !h.piece_ids.empty()) h.split_at = static_cast<int>(h.piece_ids.size());
            for (auto [start, d] : cut_session(a, b, p.routes[run.route], rng)) {
                WorkPiece k;
                k.id = static_cast<int>(inst.pieces.size());
                k.source_id = h.id;
                k.start = start;
                k.duration = d;
                k.reward = d * hours;
                k.route = run.route;
                inst.pieces.push_back(k);
                h.piece_ids.push_back(k.id);
            }
            for (Period t = a; t < b; ++t) ++buses[run.route][t];
        }
        inst.sources.push_back(std::move(h));
    }

    // Extra trips: successive round-trip slots inside each operating period of each eligible route.
    struct Slot {
        int piece;
        double weight;
    };
    std::vector<Slot> slots;
    for (int r = 0; r < static_cast<int>(p.routes.size()); ++r) {
        if (!p.routes[r].extra_trips) continue;
        for (std::size_t b = 0; b < p.operating_breaks.size(); ++b) {
            const Period lo = p.operating_breaks[b];
            const Period hi = b + 1 < p.operating_breaks.size() ? p.operating_breaks[b + 1] : p.T;
            for (Period t = lo; t < hi;) {
                const int d = uniform_int(rng, p.routes[r].rt_min, p.routes[r].rt_max);
                if (t + d > p.T) break;
                if (buses[r][t] > 0) {
                    const bool peak = p.am.contains(t) || p.pm.contains(t);
                    WorkSource h;
                    h.id = static_cast<int>(inst.sources.size());
                    h.kind = SourceKind::extra_trip;
                    h.label = "extra route " + std::to_string(r) + " t" + std::to_string(t);
                    WorkPiece k;
                    k.id = static_cast<int>(inst.pieces.size());
                    k.source_id = h.id;
                    k.start = t;
                    k.duration = d;
                    k.reward = d * hours;
                    k.route = r;
                    h.piece_ids.push_back(k.id);
                    slots.push_back({k.id, buses[r][t] * (peak ? p.peak_weight : 1.0)});
                    inst.pieces.push_back(k);
                    inst.sources.push_back(std::move(h));
                }
                t += d;
            }
        }
    }
    double weighted_hours = 0.0;
    for (const auto& s : slots) weighted_hours += s.weight * inst.pieces[s.piece].duration * hours;
    const double scale = weighted_hours > 0.0 ? p.extra_open_hours / weighted_hours : 0.0;
    for (const auto& s : slots)
        inst.sources[inst.pieces[s.piece].source_id].p = std::min(p.extra_p_cap, scale * s.weight);

    if (auto v = validate_instance(inst); !v.empty()) throw ValidationError(std::move(v));
    return inst;
}

Instance gen_miway_like(GenParams p, std::uint64_t seed) {
    p.seed = seed;
    return generate_instance(p);
}

Instance gen_synthetic_large(GenParams p, std::uint64_t seed) {
    p.seed = seed;
    return generate_instance(p);
}

double scheduled_run_hours(const Instance& inst) {
    double periods = 0;
    for (const auto& h : inst.sources)
        if (h.kind == SourceKind::straight_run || h.kind == SourceKind::split_run)
            for (int k : h.piece_ids) periods += inst.pieces[k].duration;
    return periods * inst.period_hours();
}

std::vector<HeadwayBand> default_headway_bands() {
    return {{{0, 4}, 30, false},  {{4, 20}, 15, true},  {{20, 44}, 20, false},
            {{44, 60}, 15, true}, {{60, 68}, 20, false}, {{68, 94}, 30, false}};
}

std::vector<double> linear_multipliers(int routes, double first, double last) {
    std::vector<double> out;
    for (int r = 0; r < routes; ++r) out.push_back(routes == 1 ? first : first + (last - first) * r / (routes - 1));
    return out;
}

WaitTimeConfig miway_wait_config() {
    WaitTimeConfig c;
    c.route_multipliers = linear_multipliers(7, 1.3, 0.7);
    c.bands = default_headway_bands();
    return c;
}

WaitTimeConfig synthetic_wait_config() {
    WaitTimeConfig c;
    c.route_multipliers = linear_multipliers(13, 1.0 / std::sqrt(3.0), std::sqrt(3.0));
    c.bands = default_headway_bands();
    return c;
}

Instance apply_wait_time_rewards(const Instance& inst, const WaitTimeConfig& cfg) {
    Instance out = inst;
    for (auto& k : out.pieces) {
        if (k.route < 0 || k.route >= static_cast<int>(cfg.route_multipliers.size()))
            throw ContractViolation("wait-time rewards: piece " + std::to_string(k.id) + " has no route multiplier");
        auto band = std::find_if(cfg.bands.begin(), cfg.bands.end(), [&](const HeadwayBand& b) { return b.window.contains(k.start); });
        if (band == cfg.bands.end())
            throw ContractViolation("wait-time rewards: piece " + std::to_string(k.id) + " starts outside every headway band");
        const double riders = cfg.boarding_rate * k.duration * cfg.route_multipliers[k.route] * (band->peak ? cfg.peak_multiplier : 1.0);
        k.reward = riders * band->headway_minutes / 60.0;
    }
    return out;
}

std::vector<Extraboard> place_report_times(const Instance& inst, int n_xb, int shift_periods) {
    if (n_xb < 0) throw ContractViolation("place_report_times: negative roster size");
    const double hours = inst.period_hours();
    std::vector<double> residual(inst.T, 0.0);
    for (const auto& h : inst.sources)
        for (int kid : h.piece_ids) {
            const auto& k = inst.pieces[kid];
            for (Period t = k.start; t <= k.last(); ++t) residual[t] += h.p * hours;
        }
    std::vector<Extraboard> out;
    const Period last_start = std::max(0, inst.T - shift_periods);
    for (int n = 0; n < n_xb; ++n) {
        Period best_s = 0;
        double best = -1.0;
        for (Period s = 0; s <= last_start; ++s) {
            double covered = 0.0;
            for (Period t = s; t < std::min(inst.T, s + shift_periods); ++t) covered += std::min(residual[t], hours);
            if (covered > best + 1e-12) {
                best = covered;
                best_s = s;
            }
        }
        for (Period t = best_s; t < std::min(inst.T, best_s + shift_periods); ++t) residual[t] -= std::min(residual[t], hours);
        out.push_back({n, best_s, std::min(inst.T - 1, best_s + shift_periods - 1), "xb " + std::to_string(n)});
    }
    std::stable_sort(out.begin(), out.end(), [](const Extraboard& a, const Extraboard& b) { return a.start < b.start; });
    for (int n = 0; n < n_xb; ++n) out[n].id = n;
    return out;
}

std::vector<OvertimeDriver> gen_ot_roster(const Instance& inst, const OtRosterSpec& spec) {
    std::vector<OvertimeDriver> out;
    auto lay = [&](int count, int spacing, Window w, const char* name) {
        if (count < 0 || (count > 1 && spacing < 1)) throw ContractViolation(std::string("ot roster: bad ") + name + " grid");
        if (count > 0 && w.start + (count - 1) * spacing >= w.end)
            throw ContractViolation(std::string("ot roster: ") + name + " window too small for " + std::to_string(count) + " drivers");
        for (int n = 0; n < count; ++n) {
            const Period s = w.start + n * spacing;
            if (s + inst.delta_ot >= inst.T) throw ContractViolation("ot roster: standby window extends past horizon");
            out.push_back({static_cast<int>(out.size()), s, std::string(name) + " " + std::to_string(n)});
        }
    };
    lay(spec.am_count, spec.am_spacing, spec.am, "am");
    lay(spec.pm_count, spec.pm_spacing, spec.pm, "pm");
    return out;
}

Instance with_roster(const Instance& inst, std::vector<Extraboard> xbs, std::vector<OvertimeDriver> ots) {
    Instance out = inst;
    for (std::size_t n = 0; n < xbs.size(); ++n) xbs[n].id = static_cast<int>(n);
    for (std::size_t n = 0; n < ots.size(); ++n) ots[n].id = static_cast<int>(n);
    out.xbs = std::move(xbs);
    out.ots = std::move(ots);
    return out;
}

Instance scale_probabilities(const Instance& inst, double scale) {
    Instance out = inst;
    for (auto& h : out.sources) {
        h.p *= scale;
        if (h.p > 1.0 + 1e-12) throw ContractViolation("probability scale pushes source " + std::to_string(h.id) + " above 1");
        h.p = std::min(h.p, 1.0);
    }
    return out;
}

namespace {

std::string pattern_name(ServicePattern p) {
    switch (p) {
        case ServicePattern::flat: return "flat";
        case ServicePattern::peaked: return "peaked";
        case ServicePattern::peak_only: return "peak_only";
    }
    return "flat";
}

ServicePattern parse_pattern(const std::string& s) {
    if (s == "flat") return ServicePattern::flat;
    if (s == "peaked") return ServicePattern::peaked;
    if (s == "peak_only") return ServicePattern::peak_only;
    throw ParseError("gen params: unknown service pattern '" + s + "'");
}

}  // namespace

std::string gen_params_to_json(const GenParams& p) {
    nlohmann::json routes = nlohmann::json::array();
    for (const auto& r : p.routes)
        routes.push_back({{"pattern", pattern_name(r.pattern)}, {"rt_min", r.rt_min}, {"rt_max", r.rt_max},
                          {"extra_trips", r.extra_trips}, {"long_runs", r.long_runs}});
    nlohmann::json j{{"T", p.T}, {"period_minutes", p.period_minutes}, {"delta_ot", p.delta_ot}, {"c_ot", p.c_ot},
                     {"routes", routes}, {"straight8", p.straight8}, {"straight10", p.straight10}, {"split", p.split},
                     {"part_time", p.part_time}, {"absence_p", p.absence_p}, {"extra_open_hours", p.extra_open_hours},
                     {"peak_weight", p.peak_weight}, {"extra_p_cap", p.extra_p_cap},
                     {"am", {p.am.start, p.am.end}}, {"pm", {p.pm.start, p.pm.end}},
                     {"operating_breaks", p.operating_breaks}, {"seed", p.seed}};
    return j.dump();
}

GenParams gen_params_from_json(std::string_view text, GenParams p) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("gen params: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("gen params: expected an object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& key = it.key();
            const auto& v = it.value();
            if (key == "T") p.T = v.get<int>();
            else if (key == "period_minutes") p.period_minutes = v.get<int>();
            else if (key == "delta_ot") p.delta_ot = v.get<int>();
            else if (key == "c_ot") p.c_ot = v.get<double>();
            else if (key == "straight8") p.straight8 = v.get<int>();
            else if (key == "straight10") p.straight10 = v.get<int>();
            else if (key == "split") p.split = v.get<int>();
            else if (key == "part_time") p.part_time = v.get<int>();
            else if (key == "absence_p") p.absence_p = v.get<double>();
            else if (key == "extra_open_hours") p.extra_open_hours = v.get<double>();
            else if (key == "peak_weight") p.peak_weight = v.get<double>();
            else if (key == "extra_p_cap") p.extra_p_cap = v.get<double>();
            else if (key == "am") p.am = {v.at(0).get<int>(), v.at(1).get<int>()};
            else if (key == "pm") p.pm = {v.at(0).get<int>(), v.at(1).get<int>()};
            else if (key == "operating_breaks") p.operating_breaks = v.get<std::vector<Period>>();
            else if (key == "seed") p.seed = v.get<std::uint64_t>();
            else if (key == "routes") {
                p.routes.clear();
                for (const auto& r : v)
                    p.routes.push_back({parse_pattern(r.at("pattern").get<std::string>()), r.at("rt_min").get<int>(),
                                        r.at("rt_max").get<int>(), r.value("extra_trips", true), r.value("long_runs", false)});
            } else {
                throw ParseError("gen params: unknown key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("gen params: ") + e.what());
    }
    return p;
}

}  // namespace xbadp
