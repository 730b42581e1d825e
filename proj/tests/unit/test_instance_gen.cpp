#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "xbadp/instance_gen.hpp"
#include "xbadp/mdp.hpp"

using namespace xbadp;

TEST_SUITE("instance_gen") {

TEST_CASE("MiWay-like defaults") {
    const Instance inst = gen_miway_like(miway_params(), 1);
    CHECK(validate_instance(inst).empty());
    CHECK(inst.T == 94);
    CHECK(std::abs(scheduled_run_hours(inst) - 643.0) / 643.0 <= 0.05);
    int regular = 0;
    for (const auto& h : inst.sources)
        if (h.kind == SourceKind::straight_run || h.kind == SourceKind::split_run) {
            ++regular;
            CHECK(h.p == doctest::Approx(0.07));
        }
    CHECK(regular == 87);
    for (const auto& k : inst.pieces) {
        CHECK(k.duration >= 1);
        CHECK(k.duration <= 11);  // 2.75 h
    }
    // Open work sits near 77 hours at the base level.
    CHECK(expected_open_hours(inst) == doctest::Approx(76.86).epsilon(0.1));
}

TEST_CASE("zero absence and no extra trips: nothing can open") {
    auto p = miway_params();
    p.absence_p = 0.0;
    p.extra_open_hours = 0.0;
    const Instance inst = gen_miway_like(p, 3);
    for (const auto& h : inst.sources) CHECK(h.p == 0.0);
}

TEST_CASE("expected open hours match Monte Carlo") {
    const Instance inst = gen_miway_like(miway_params(), 2);
    const double analytic = expected_open_hours(inst);
    const int n = 1000;
    double sum = 0.0, sq = 0.0;
    for (int s = 0; s < n; ++s) {
        const auto path = sample_path(inst, s);
        double hours = 0.0;
        for (const auto& r : path.reveals)
            for (int k : r) hours += inst.pieces[k].duration * inst.period_hours();
        sum += hours;
        sq += hours * hours;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - analytic) <= 3 * se);
    CHECK(std::abs(mean - analytic) / analytic <= 0.05);
}

TEST_CASE("determinism per seed") {
    const auto a = save_schedule(gen_miway_like(miway_params(), 9));
    CHECK(a == save_schedule(gen_miway_like(miway_params(), 9)));
    CHECK(a != save_schedule(gen_miway_like(miway_params(), 10)));
}

TEST_CASE("large synthetic defaults") {
    const auto p = synthetic_params();
    const Instance inst = gen_synthetic_large(p, 1);
    CHECK(validate_instance(inst).empty());
    CHECK(p.routes.size() == 13u);
    int runs = 0;
    for (const auto& h : inst.sources) runs += h.kind != SourceKind::extra_trip;
    CHECK(runs == 282);
    CHECK(std::abs(scheduled_run_hours(inst) - 2186.0) / 2186.0 <= 0.05);
    int in_range = 0;
    for (const auto& k : inst.pieces) {
        CHECK(k.duration <= 15);
        in_range += k.duration >= 5;
        const auto& r = p.routes[k.route];
        if (r.pattern == ServicePattern::peak_only) {
            const bool near_peak = (k.start >= p.am.start - 4 && k.end() <= p.am.end + 4) ||
                                   (k.start >= p.pm.start - 4 && k.end() <= p.pm.end + 4);
            CHECK(near_peak);
        }
    }
    CHECK(in_range >= 0.95 * inst.pieces.size());
}

TEST_CASE("wait-time rewards") {
    fx::Builder b(94);
    b.source({{28, 6}});  // midday band, 20-minute headway
    b.source({{8, 6}});   // AM peak, 15-minute headway
    b.source({{24, 6}});
    for (auto& k : b.inst.pieces) k.route = 0;
    WaitTimeConfig cfg;
    cfg.route_multipliers = {1.0};
    cfg.bands = default_headway_bands();
    SUBCASE("reference piece: 36 riders, 20-minute headway") {
        const Instance w = apply_wait_time_rewards(b.inst, cfg);
        CHECK(w.pieces[0].reward == doctest::Approx(12.0).epsilon(1e-12));
        CHECK(w.pieces[0].start == b.inst.pieces[0].start);
        CHECK(w.sources == b.inst.sources);
    }
    SUBCASE("zero multiplier") {
        cfg.route_multipliers = {0.0};
        for (const auto& k : apply_wait_time_rewards(b.inst, cfg).pieces) CHECK(k.reward == 0.0);
    }
    SUBCASE("peak factor at equal headway") {
        for (auto& band : cfg.bands) band.headway_minutes = 20;
        const Instance w = apply_wait_time_rewards(b.inst, cfg);
        CHECK(w.pieces[1].reward == doctest::Approx(1.5 * w.pieces[2].reward));
    }
    SUBCASE("piece without a route") {
        b.inst.pieces[0].route = -1;
        CHECK_THROWS_AS(apply_wait_time_rewards(b.inst, cfg), ContractViolation);
    }
    SUBCASE("multiplier spreads") {
        const auto m = miway_wait_config().route_multipliers;
        CHECK(m.front() == doctest::Approx(1.3));
        CHECK(m.back() == doctest::Approx(0.7));
        const auto s = synthetic_wait_config().route_multipliers;
        CHECK(s.back() / s.front() == doctest::Approx(3.0));
    }
}

TEST_CASE("report-time placement") {
    SUBCASE("empty roster") {
        const Instance inst = gen_miway_like(miway_params(), 1);
        CHECK(place_report_times(inst, 0).empty());
        CHECK_THROWS(place_report_times(inst, -1));
    }
    SUBCASE("flat density tiles the horizon") {
        fx::Builder b(90);
        for (Period t = 0; t < 90; t += 3) b.source({{t, 3}}, 1.0);
        const auto xbs = place_report_times(b.inst, 3, 30);
        REQUIRE(xbs.size() == 3u);
        std::set<Period> starts;
        for (const auto& x : xbs) starts.insert(x.start);
        CHECK(starts == std::set<Period>{0, 30, 60});
    }
    SUBCASE("two peaks: first two shifts straddle them") {
        fx::Builder b(94);
        for (Period t = 4; t < 20; t += 2) b.source({{t, 2}}, 0.9);
        for (Period t = 44; t < 60; t += 2) b.source({{t, 2}}, 1.0);
        b.source({{30, 2}}, 0.05);
        const auto xbs = place_report_times(b.inst, 2, 30);
        REQUIRE(xbs.size() == 2u);
        CHECK(xbs[0].start <= 4);
        CHECK(xbs[0].end >= 19);
        CHECK(xbs[1].start <= 44);
        CHECK(xbs[1].end >= 59);
    }
    SUBCASE("shifts stay inside the horizon") {
        const Instance inst = gen_miway_like(miway_params(), 4);
        for (const auto& x : place_report_times(inst, 18)) {
            CHECK(x.start >= 0);
            CHECK(x.end < inst.T);
            CHECK(x.end - x.start + 1 == 30);
        }
    }
}

TEST_CASE("OT roster") {
    const Instance inst = gen_miway_like(miway_params(), 1);
    const auto ots = gen_ot_roster(inst, {});
    REQUIRE(ots.size() == 10u);
    int am = 0;
    for (const auto& o : ots) am += o.start < 44;
    CHECK(am == 3);
    CHECK(ots[4].start - ots[3].start == 2);
    CHECK(ots[1].start - ots[0].start == 4);
    OtRosterSpec none;
    none.am_count = none.pm_count = 0;
    CHECK(gen_ot_roster(inst, none).empty());
    OtRosterSpec crowded;
    crowded.pm_count = 20;
    CHECK_THROWS_AS(gen_ot_roster(inst, crowded), ContractViolation);
}

TEST_CASE("probability scaling") {
    const Instance inst = gen_miway_like(miway_params(), 1);
    const Instance hi = scale_probabilities(inst, 1.5);
    for (std::size_t h = 0; h < inst.sources.size(); ++h) CHECK(hi.sources[h].p == doctest::Approx(1.5 * inst.sources[h].p));
    CHECK_THROWS_AS(scale_probabilities(inst, 3.0), ContractViolation);
}

TEST_CASE("generator params JSON") {
    const auto p = miway_params();
    const auto back = gen_params_from_json(gen_params_to_json(p), GenParams{});
    CHECK(save_schedule(gen_miway_like(back, 5)) == save_schedule(gen_miway_like(p, 5)));
    CHECK(gen_params_from_json(R"({"straight8": 10})", p).straight8 == 10);
    CHECK_THROWS(gen_params_from_json(R"({"bogus": 1})", p));
}

}  // TEST_SUITE
