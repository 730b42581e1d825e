#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "xbadp/harness.hpp"
#include "xbadp/instance_gen.hpp"
#include "xbadp/policies.hpp"

using namespace xbadp;

namespace {

ValueArtifacts zero_artifacts(const Instance& inst) {
    TrainOptions t;
    t.train_losses = false;
    auto a = train_artifacts(inst, t);
    for (auto& tab : a.xb_tables)
        for (auto& row : tab.rows) std::fill(row.begin(), row.end(), 0.0);
    for (auto& tab : a.ot_tables) std::fill(tab.values.begin(), tab.values.end(), 0.0);
    return a;
}

State at(const Instance& inst, Period t, std::vector<int> open) {
    State s = initial_state(inst, {});
    s.t = t;
    for (std::size_t j = 0; j < s.tau.size(); ++j) s.tau[j] = std::max<Period>(t, inst.xbs[j].start);
    for (std::size_t i = 0; i < s.phi.size(); ++i) s.phi[i] = std::max(0, t - inst.ots[i].start);
    s.open = std::move(open);
    return s;
}

}  // namespace

TEST_SUITE("policies") {

TEST_CASE("policy names") {
    CHECK(parse_policy("myo_xb") == PolicyKind::myopic_xb_first);
    CHECK(parse_policy("pi") == PolicyKind::perfect_info);
    CHECK(to_string(PolicyKind::practice) == "practice");
    CHECK_THROWS(parse_policy("greedy"));
}

TEST_CASE("approximate policy basics") {
    fx::Builder b(40);
    b.source({{10, 4}}, 1.0, {2.0});
    b.xb(5, 39);
    SUBCASE("no available drivers") {
        const auto art = zero_artifacts(b.inst);
        const State s = at(b.inst, 2, {0});
        CHECK(approx_decide(b.inst, s, art, {}).empty());
    }
    SUBCASE("clear assignment") {
        const auto art = zero_artifacts(b.inst);
        const State s = at(b.inst, 10, {0});
        const auto d = approx_decide(b.inst, s, art, {});
        REQUIRE(d.xb_assign.count(0));
        CHECK(d.xb_assign.at(0) == std::vector<int>{0});
    }
    SUBCASE("low-value piece against a high hold value: hold") {
        b.source({{11, 2}}, 1.0, {9.0});  // certain, worth much more, clashes with piece 0
        TrainOptions t;
        t.train_losses = false;
        const auto art = train_artifacts(b.inst, t);
        const State s = at(b.inst, 10, {0});  // piece 1 not yet revealed
        const auto ep = approx_epoch(b.inst, s, art, {});
        CHECK(ep.decisions.empty());
        CHECK(enumerate_oracle(ep.program).objective == doctest::Approx(ep.solution.objective).epsilon(1e-12));
    }
}

TEST_CASE("approximate policy with zero values maximizes immediate reward") {
    fx::Builder b(40, 4);
    b.source({{10, 4}}, 1.0, {1.0});   // 0
    b.source({{10, 2}}, 1.0, {2.0});   // 1
    b.source({{12, 2}}, 1.0, {1.5});   // 2
    b.xb(5, 39).xb(5, 20).ot(8);
    const auto art = zero_artifacts(b.inst);
    const State s = at(b.inst, 10, {0, 1, 2});
    PolicyConfig cfg;
    cfg.mode = ProgramMode::simple;
    const auto d = approx_decide(b.inst, s, art, cfg);
    CHECK(reward(b.inst, s, d) == doctest::Approx(4.5));
    const auto myo = myopic_decide(b.inst, s, MyopicMode::xb_first);
    CHECK(reward(b.inst, s, d) >= reward(b.inst, s, myo, DecisionMode::plain));
}

TEST_CASE("myopic rules") {
    SUBCASE("earliest shift end wins") {
        fx::Builder b(40);
        b.source({{10, 2}});
        b.xb(0, 30).xb(0, 20);
        const auto d = myopic_decide(b.inst, at(b.inst, 10, {0}), MyopicMode::xb_first);
        CHECK(d.xb_assign.count(1));
        CHECK_FALSE(d.xb_assign.count(0));
    }
    SUBCASE("no XB left: OT takes the piece") {
        fx::Builder b(40, 4);
        b.source({{10, 2}});
        b.xb(12, 30).ot(8);
        const auto d = myopic_decide(b.inst, at(b.inst, 10, {0}), MyopicMode::xb_first);
        CHECK(d.ot_assign.at(0) == 0);
    }
    SUBCASE("two now-pieces, one XB") {
        fx::Builder b(40, 4);
        b.source({{10, 2}});
        b.source({{10, 3}});
        b.xb(0, 30);
        auto d = myopic_decide(b.inst, at(b.inst, 10, {0, 1}), MyopicMode::xb_first);
        CHECK(d.xb_assign.at(0) == std::vector<int>{0});
        CHECK(d.ot_assign.empty());
        b.ot(8);
        d = myopic_decide(b.inst, at(b.inst, 10, {0, 1}), MyopicMode::xb_first);
        CHECK(d.ot_assign.at(0) == 1);
    }
    SUBCASE("OT-first exhausts OTs, longest standby first") {
        fx::Builder b(40, 4);
        b.source({{10, 2}});
        b.source({{10, 2}});
        b.xb(0, 30).ot(9).ot(7);
        const auto d = myopic_decide(b.inst, at(b.inst, 10, {0, 1}), MyopicMode::ot_first);
        CHECK(d.ot_assign.at(1) == 0);
        CHECK(d.ot_assign.at(0) == 1);
        CHECK(d.xb_assign.empty());
    }
    SUBCASE("future pieces are never assigned") {
        fx::Builder b(40);
        b.source({{12, 2}});
        b.xb(0, 30);
        CHECK(myopic_decide(b.inst, at(b.inst, 10, {0}), MyopicMode::xb_first).empty());
    }
}

TEST_CASE("merging regular runs") {
    fx::Builder b(60);
    const int straight = b.source({{0, 4}, {4, 4}, {8, 4}, {12, 4}, {16, 4}}, 0.1, {1, 1, 1, 1, 1});
    const int split = b.source({{20, 3}, {23, 3}, {40, 3}, {43, 3}}, 0.1);
    const int extra = b.source({{30, 5}}, 0.2);
    b.inst.sources[straight].kind = SourceKind::straight_run;
    b.inst.sources[split].kind = SourceKind::split_run;
    b.inst.sources[split].split_at = 2;
    b.inst.sources[extra].kind = SourceKind::extra_trip;
    b.xb(0, 59);
    const Instance m = merge_regular_runs(b.inst);
    REQUIRE(validate_instance(m).empty());
    const auto& s0 = m.sources[straight].piece_ids;
    REQUIRE(s0.size() == 2u);
    CHECK(m.pieces[s0[0]].duration == 8);
    CHECK(m.pieces[s0[1]].duration == 12);
    CHECK(m.pieces[s0[0]].reward == 2.0);
    CHECK(m.pieces[s0[1]].reward == 3.0);
    const auto& s1 = m.sources[split].piece_ids;
    REQUIRE(s1.size() == 2u);
    CHECK(m.pieces[s1[0]].start == 20);
    CHECK(m.pieces[s1[0]].duration == 6);
    CHECK(m.pieces[s1[1]].start == 40);
    const auto& s2 = m.sources[extra].piece_ids;
    REQUIRE(s2.size() == 1u);
    CHECK(m.pieces[s2[0]].duration == 5);
    CHECK(m.sources[extra].p == 0.2);
    CHECK(total_piece_hours(m) == doctest::Approx(total_piece_hours(b.inst)));
}

TEST_CASE("practice method") {
    SUBCASE("no overrule equals myopic XB-first on the merged instance, every epoch") {
        const Instance base = gen_miway_like(miway_params(), 12);
        const Instance inst = with_roster(base, place_report_times(base, 8), gen_ot_roster(base, {}));
        const Instance merged = merge_regular_runs(inst);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto path = path_from_sources(merged, sample_path(inst, seed).open_sources, seed);
            State s = initial_state(merged, path.at(0));
            for (Period t = 0; t < merged.T; ++t) {
                Rng rng(seed * 1000 + t);
                const auto d = practice_decide(merged, s, 0.0, rng);
                CHECK(d == myopic_decide(merged, s, MyopicMode::xb_first));
                const State post = apply_decisions(merged, s, d, DecisionMode::plain);
                if (t + 1 < merged.T) s = apply_exogenous(merged, post, path.at(t + 1));
            }
        }
    }
    SUBCASE("always overruled with a single eligible driver: dropped") {
        fx::Builder b(40);
        b.source({{10, 2}});
        b.xb(0, 30);
        Rng rng(1);
        for (int n = 0; n < 100; ++n) CHECK(practice_decide(b.inst, at(b.inst, 10, {0}), 1.0, rng).empty());
    }
    SUBCASE("overrule frequency") {
        fx::Builder b(40);
        b.source({{10, 2}});
        b.xb(0, 20).xb(0, 30);
        Rng rng(2);
        int moved = 0;
        const int n = 10000;
        for (int r = 0; r < n; ++r) {
            const auto d = practice_decide(b.inst, at(b.inst, 10, {0}), 0.2, rng);
            REQUIRE(d.xb_assign.size() == 1u);
            moved += d.xb_assign.count(1);
        }
        CHECK(std::abs(double(moved) / n - 0.2) < 0.02);
    }
}

TEST_CASE("all policies stay feasible over generated episodes") {
    const Instance base = gen_miway_like(miway_params(), 21);
    const Instance inst = with_roster(base, place_report_times(base, 10), gen_ot_roster(base, {}));
    TrainOptions t;
    t.loss.n_scenarios = 100;
    const auto art = train_artifacts(inst, t);
    EpisodeContext ctx;
    ctx.artifacts = &art;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto path = sample_path(inst, seed);
        for (auto policy : {PolicyKind::approx, PolicyKind::myopic_xb_first, PolicyKind::myopic_ot_first,
                            PolicyKind::practice, PolicyKind::perfect_info})
            CHECK_NOTHROW(run_episode(inst, policy, path, ctx));
    }
}

TEST_CASE("sequence cap 4 versus 6 barely moves the approximate policy") {
    const Instance base = gen_miway_like(miway_params(), 31);
    const Instance inst = with_roster(base, place_report_times(base, 10), {});
    TrainOptions t;
    t.loss.n_scenarios = 200;
    const auto art = train_artifacts(inst, t);
    EpisodeContext four, six;
    four.artifacts = six.artifacts = &art;
    six.cfg.l_max = 6;
    double r4 = 0.0, r6 = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto path = sample_path(inst, seed);
        r4 += run_episode(inst, PolicyKind::approx, path, four).total_reward;
        r6 += run_episode(inst, PolicyKind::approx, path, six).total_reward;
    }
    CHECK(std::abs(r4 - r6) / r6 < 0.001);
}

}  // TEST_SUITE
