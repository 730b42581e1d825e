#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xbadp/bp_solver.hpp"
#include "xbadp/errors.hpp"

using namespace xbadp;

namespace {

XbEntry xb_entry(int driver, double v_hld, double slope, std::vector<XbOption> options) {
    XbEntry e;
    e.driver = driver;
    e.v_hld = v_hld;
    e.slope = slope;
    e.options = std::move(options);
    return e;
}

}  // namespace

TEST_SUITE("bp_solver") {

TEST_CASE("hold value") {
    CHECK(hold_value(1.0, -0.3, 2) == doctest::Approx(0.4));
    CHECK(hold_value(1.0, -0.3, 0) == 1.0);
    CHECK(hold_value(1.0, -0.3, 5) == 0.0);
}

TEST_CASE("no open pieces: everyone holds") {
    EpochProgram p;
    p.xbs.push_back(xb_entry(0, 1.0, -0.2, {}));
    p.xbs.push_back(xb_entry(1, 2.0, -0.4, {}));
    OtEntry o;
    o.driver = 0;
    o.v_hld = 0.5;
    o.slope = -0.1;
    p.ots.push_back(o);
    const auto s = solve_exact(p);
    CHECK(s.xb_choice == std::vector<int>{-1, -1});
    CHECK(s.ot_choice == std::vector<int>{-1});
    const double expect = hold_value(1.0, -0.2, 0.5) + hold_value(2.0, -0.4, 0.5) + hold_value(0.5, -0.1, 2);
    CHECK(s.objective == doctest::Approx(expect).epsilon(1e-12));
    CHECK(s.covered.empty());
}

TEST_CASE("single clear assignment") {
    EpochProgram p;
    p.pieces = {4};
    p.xbs.push_back(xb_entry(0, 1.0, 0.0, {XbOption{{4}, 2.0, 0.1}}));
    const auto s = solve_exact(p);
    CHECK(s.xb_choice == std::vector<int>{0});
    CHECK(s.objective == doctest::Approx(2.1));
    CHECK(s.covered == std::vector<int>{4});
}

TEST_CASE("active holding when the hold value is higher") {
    EpochProgram p;
    p.pieces = {4};
    p.xbs.push_back(xb_entry(0, 3.0, 0.0, {XbOption{{4}, 0.5, 0.1}}));
    CHECK(solve_exact(p).xb_choice == std::vector<int>{-1});
}

TEST_CASE("empty program") {
    EpochProgram p;
    const auto s = solve_exact(p);
    CHECK(s.objective == 0.0);
    CHECK(enumerate_oracle(p).objective == 0.0);
}

TEST_CASE("greedy is beaten on a clash instance") {
    // XB 0 grabs {a, b} greedily (3.0), blocking XB 1's b and XB 2's a; the split is worth 4.0.
    EpochProgram p;
    p.mode = ProgramMode::simple;
    p.pieces = {1, 2, 3};
    p.xbs.push_back(xb_entry(0, 0.0, 0.0, {XbOption{{1, 2}, 3.0, 0.0}, XbOption{{3}, 1.0, 0.0}}));
    p.xbs.push_back(xb_entry(1, 0.0, 0.0, {XbOption{{2}, 1.5, 0.0}}));
    p.xbs.push_back(xb_entry(2, 0.0, 0.0, {XbOption{{1}, 1.5, 0.0}}));
    const auto oracle_sol = enumerate_oracle(p);
    CHECK(oracle_sol.objective == doctest::Approx(4.0));
    CHECK(oracle_sol.objective > 3.0);
    CHECK(solve_exact(p).objective == doctest::Approx(4.0));
}

TEST_CASE("random programs agree with enumeration, decisions included") {
    Rng rng(55);
    for (int rep = 0; rep < 400; ++rep) {
        const auto mode = rep % 2 ? ProgramMode::oversupply : ProgramMode::simple;
        const auto p = oracle::random_program(rng, 3, 2, 6, 12, mode);
        REQUIRE(validate_program(p).empty());
        const auto a = solve_exact(p);
        const auto b = enumerate_oracle(p);
        CHECK(std::abs(a.objective - b.objective) < 1e-9);
        CHECK(a.xb_choice == b.xb_choice);
        CHECK(a.ot_choice == b.ot_choice);
        CHECK(std::abs(evaluate_objective(p, a.xb_choice, a.ot_choice) - a.objective) < 1e-12);
        CHECK_FALSE(a.deadline_hit);
    }
}

TEST_CASE("removing a piece never increases the optimum") {
    Rng rng(56);
    for (int rep = 0; rep < 100; ++rep) {
        const auto p = oracle::random_program(rng, 3, 2, 6, 12, ProgramMode::oversupply);
        if (p.pieces.empty()) continue;
        const int gone = p.pieces[rng.below(p.pieces.size())];
        EpochProgram q = p;
        q.pieces.erase(std::find(q.pieces.begin(), q.pieces.end(), gone));
        for (auto& e : q.xbs)
            e.options.erase(std::remove_if(e.options.begin(), e.options.end(),
                                           [&](const XbOption& o) {
                                               return std::find(o.pieces.begin(), o.pieces.end(), gone) != o.pieces.end();
                                           }),
                            e.options.end());
        for (auto& e : q.ots)
            e.options.erase(std::remove_if(e.options.begin(), e.options.end(), [&](const OtOption& o) { return o.piece == gone; }),
                            e.options.end());
        CHECK(solve_exact(q).objective <= solve_exact(p).objective + 1e-12);
    }
}

TEST_CASE("simple mode equals oversupply mode with zero slopes") {
    Rng rng(57);
    for (int rep = 0; rep < 100; ++rep) {
        auto p = oracle::random_program(rng, 3, 2, 6, 12, ProgramMode::simple);
        auto q = p;
        q.mode = ProgramMode::oversupply;
        CHECK(solve_exact(p).objective == doctest::Approx(solve_exact(q).objective).epsilon(1e-12));
    }
}

TEST_CASE("clashing assignments are rejected by evaluation") {
    EpochProgram p;
    p.pieces = {1};
    p.xbs.push_back(xb_entry(0, 0.0, 0.0, {XbOption{{1}, 1.0, 0.0}}));
    p.xbs.push_back(xb_entry(1, 0.0, 0.0, {XbOption{{1}, 1.0, 0.0}}));
    CHECK_THROWS_AS(evaluate_objective(p, {0, 0}, {}), ContractViolation);
}

TEST_CASE("validation catches broken programs") {
    EpochProgram p;
    p.pieces = {1};
    p.xbs.push_back(xb_entry(0, -1.0, 0.5, {XbOption{{2}, 1.0, 0.0}}));
    const auto v = validate_program(p);
    CHECK(v.size() >= 3u);
}

TEST_CASE("oracle cap") {
    Rng rng(58);
    EpochProgram p;
    for (int k = 0; k < 30; ++k) p.pieces.push_back(k);
    for (int q = 0; q < 12; ++q) {
        std::vector<XbOption> opts;
        for (int k = 0; k < 30; ++k) opts.push_back(XbOption{{k}, rng.uniform(), 0.0});
        p.xbs.push_back(xb_entry(q, 0.5, -0.1, opts));
    }
    CHECK_THROWS_AS(enumerate_oracle(p, 1000), ContractViolation);
}

TEST_CASE("deadline returns a flagged feasible incumbent") {
    Rng rng(59);
    EpochProgram p;
    p.n_max = 20;
    for (int k = 0; k < 60; ++k) p.pieces.push_back(k);
    for (int q = 0; q < 22; ++q) {
        std::vector<XbOption> opts;
        for (int o = 0; o < 25; ++o) {
            std::vector<int> ids{static_cast<int>(rng.below(60)), static_cast<int>(rng.below(60))};
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            opts.push_back(XbOption{ids, 1.0 + rng.uniform(), rng.uniform()});
        }
        p.xbs.push_back(xb_entry(q, 1.0 + rng.uniform(), -0.05 * rng.uniform(), opts));
    }
    SolveOptions o;
    o.deadline_ms = 0.0;
    const auto s = solve_exact(p, o);
    CHECK(s.deadline_hit);
    CHECK(std::abs(evaluate_objective(p, s.xb_choice, s.ot_choice) - s.objective) < 1e-12);
}

TEST_CASE("program json dump") {
    EpochProgram p;
    p.pieces = {4};
    p.xbs.push_back(xb_entry(0, 1.0, 0.0, {XbOption{{4}, 2.0, 0.1}}));
    const auto text = program_to_json(p);
    CHECK(text.find("\"pieces\"") != std::string::npos);
}

}  // TEST_SUITE
