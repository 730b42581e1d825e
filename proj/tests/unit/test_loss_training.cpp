#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "xbadp/errors.hpp"
#include "xbadp/instance_gen.hpp"
#include "xbadp/loss_training.hpp"

using namespace xbadp;

TEST_SUITE("loss_training") {

TEST_CASE("n_max") {
    fx::Builder one(30);
    one.xb(0, 10);
    CHECK(compute_n_max(one.inst) == 1);
    fx::Builder two(30);
    two.xb(0, 10).xb(5, 15);
    CHECK(compute_n_max(two.inst) == 1);
    fx::Builder many(30);
    for (int j = 0; j < 18; ++j) many.xb(j % 3, 20 + j % 5);
    CHECK(compute_n_max(many.inst) == 17);
}

TEST_CASE("source best value") {
    SUBCASE("single piece, no continuation") {
        fx::Builder b(30);
        b.source({{28, 1}}, 1.0, {1.0});
        b.xb(0, 29);
        const auto tab = train_xb_values(b.inst, b.inst.xbs[0]);
        CHECK(source_best_value(b.inst, b.inst.xbs[0], 0, tab) == 1.0);
    }
    SUBCASE("max over prefixes") {
        fx::Builder b(30);
        b.source({{5, 2}, {8, 2}, {11, 2}}, 1.0, {1.2, 0.7, -0.2});
        b.xb(0, 29);
        XbValueTable tab = train_xb_values(b.inst, b.inst.xbs[0]);
        for (auto& row : tab.rows) std::fill(row.begin(), row.end(), 0.0);
        CHECK(source_best_value(b.inst, b.inst.xbs[0], 0, tab) == doctest::Approx(1.9));
    }
    SUBCASE("ineligible first piece") {
        fx::Builder b(30);
        b.source({{2, 2}});
        b.xb(5, 29);
        const auto tab = train_xb_values(b.inst, b.inst.xbs[0]);
        CHECK(source_best_value(b.inst, b.inst.xbs[0], 0, tab) < 0.0);
    }
    SUBCASE("agrees with best_sequence_value at the first piece") {
        const Instance inst = gen_miway_like(miway_params(), 2);
        const auto xb = place_report_times(inst, 4)[1];
        const auto tab = train_xb_values(inst, xb);
        int checked = 0;
        for (const auto& h : inst.sources) {
            const Period a = inst.source_start(h.id);
            const double v = source_best_value(inst, xb, h.id, tab);
            if (v < 0.0) continue;
            CHECK(v == best_sequence_value(inst, xb, h.id, a, a, tab));
            ++checked;
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("truncated slope fit") {
    SUBCASE("exact line") {
        const auto f = fit_truncated_slope({2.0, 1.6, 1.2, 0.8, 0.4, 0.0});
        CHECK(f.slope == doctest::Approx(-0.4).epsilon(1e-12));
        CHECK(f.n_upper == 5);
    }
    SUBCASE("linear then flat zeros stops at the linear segment") {
        std::vector<double> v;
        for (int n = 0; n <= 5; ++n) v.push_back(5.0 - n);
        for (int n = 6; n <= 12; ++n) v.push_back(0.0);
        const auto f = fit_truncated_slope(v);
        CHECK(f.n_upper == 5);
        CHECK(f.slope == doctest::Approx(-1.0));
        CHECK(f.r2 >= 0.995);
    }
    SUBCASE("two points") { CHECK(fit_truncated_slope({1.0, 0.7}).slope == doctest::Approx(-0.3).epsilon(1e-12)); }
    SUBCASE("constant points") {
        const auto f = fit_truncated_slope({0.5, 0.5, 0.5});
        CHECK(f.slope == 0.0);
        CHECK(f.r2 == 1.0);
    }
    SUBCASE("too few points") { CHECK_THROWS_AS(fit_truncated_slope({1.0}), ContractViolation); }
}

TEST_CASE("XB loss closed forms") {
    SUBCASE("all closed sources give zero slopes") {
        fx::Builder b(40);
        b.source({{10, 2}}, 0.0);
        b.source({{14, 2}}, 0.0);
        b.xb(0, 39).xb(0, 39).xb(0, 39);
        const auto tab = train_xb_values(b.inst, b.inst.xbs[0]);
        const auto loss = train_xb_loss(b.inst, b.inst.xbs[0], tab, compute_n_max(b.inst), {});
        for (double s : loss.slopes) CHECK(s == 0.0);
    }
    SUBCASE("one certain source") {
        fx::Builder b(40);
        b.source({{30, 2}}, 1.0, {1.0});
        b.xb(0, 39).xb(0, 39).xb(0, 39);
        const int n_max = compute_n_max(b.inst);
        CHECK(n_max == 2);
        const auto tab = train_xb_values(b.inst, b.inst.xbs[0]);
        std::vector<LossCurve> curves;
        const auto loss = train_xb_loss(b.inst, b.inst.xbs[0], tab, n_max, {}, &curves);
        REQUIRE_FALSE(curves.empty());
        const auto& c = curves.front();
        REQUIRE(c.v_tilde.size() == 3u);
        CHECK(c.v_tilde[0] == 1.0);
        CHECK(c.v_tilde[1] == 0.0);
        CHECK(c.v_tilde[2] == 0.0);
        // (1, 0, 0) fits poorly over three points, so the fit falls back to the first two: slope -1.
        CHECK(c.fit.n_upper == 1);
        CHECK(loss.at(0) == doctest::Approx(-1.0));
        CHECK(loss.at(30) == 0.0);  // the source is no longer ahead
    }
}

TEST_CASE("OT loss closed forms") {
    SUBCASE("empty window") {
        fx::Builder b(40, 4);
        b.source({{2, 2}});
        b.ot(20).xb(0, 39).xb(0, 39);
        const auto loss = train_ot_loss(b.inst, b.inst.ots[0], 1, {});
        for (double s : loss.slopes) CHECK(s == 0.0);
    }
    SUBCASE("single certain piece") {
        fx::Builder b(40, 4);
        b.source({{23, 1}}, 1.0, {1.1});
        b.ot(20);
        std::vector<LossCurve> curves;
        const auto loss = train_ot_loss(b.inst, b.inst.ots[0], 1, {}, &curves);
        REQUIRE_FALSE(curves.empty());
        REQUIRE(curves.front().v_tilde.size() == 2u);
        CHECK(curves.front().v_tilde[0] == doctest::Approx(1.1).epsilon(1e-12));
        CHECK(curves.front().v_tilde[1] == 0.0);
        CHECK(loss.at(20) == doctest::Approx(-1.1));
        CHECK(loss.at(24) == 0.0);  // last standby period
    }
}

TEST_CASE("slope properties and determinism on random and generated instances") {
    Rng rng(404);
    oracle::SmallSpec spec;
    spec.max_pieces_per_source = 3;
    spec.n_xb = 3;
    spec.n_ot = 2;
    for (int rep = 0; rep < 25; ++rep) {
        const Instance inst = oracle::small_instance(rng, spec);
        REQUIRE(validate_instance(inst).empty());
        const int n_max = compute_n_max(inst);
        LossOptions opts;
        opts.seed = 1000 + rep;
        for (const auto& xb : inst.xbs) {
            const auto tab = train_xb_values(inst, xb);
            double vmax = 0.0;
            for (const auto& h : inst.sources) vmax = std::max(vmax, source_best_value(inst, xb, h.id, tab));
            // Adversarial random values can rise with position; only the sign and size of slopes are checked here.
            const auto loss = train_xb_loss(inst, xb, tab, n_max, opts);
            for (double s : loss.slopes) {
                CHECK(s <= 0.0);
                CHECK(-s <= vmax + 1e-12);
            }
            CHECK(loss == train_xb_loss(inst, xb, tab, n_max, opts));
        }
        for (const auto& ot : inst.ots) {
            const auto loss = train_ot_loss(inst, ot, n_max, opts);
            for (double s : loss.slopes) CHECK(s <= 0.0);
            CHECK(loss.at(ot.start + inst.delta_ot) == 0.0);
            CHECK(loss == train_ot_loss(inst, ot, n_max, opts));
        }
    }
}

TEST_CASE("position values fall with position on a generated garage") {
    const Instance base = gen_miway_like(miway_params(), 4);
    const Instance inst = with_roster(base, place_report_times(base, 10), {});
    const int n_max = compute_n_max(inst);
    LossOptions opts;
    opts.seed = 9;
    for (const auto& xb : inst.xbs) {
        const auto tab = train_xb_values(inst, xb);
        std::vector<LossCurve> curves;
        train_xb_loss(inst, xb, tab, n_max, opts, &curves);
        for (const auto& c : curves)
            for (std::size_t n = 1; n < c.v_tilde.size(); ++n)
                CHECK(c.v_tilde[n] <= c.v_tilde[n - 1] + 0.05 * (c.v_tilde[0] + 1e-9));
    }
}

TEST_CASE("loss table zero band") {
    const Instance inst = gen_miway_like(miway_params(), 8);
    const auto xb = place_report_times(inst, 3)[0];
    const auto tab = train_xb_values(inst, xb);
    LossOptions opts;
    opts.n_scenarios = 100;
    const auto loss = train_xb_loss(inst, xb, tab, 2, opts);
    for (Period t = xb.end - inst.delta_min() + 1; t <= xb.end; ++t) CHECK(loss.at(t) == 0.0);
}

}  // TEST_SUITE
