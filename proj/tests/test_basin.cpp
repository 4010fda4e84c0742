#include <doctest.h>

#include <cmath>

#include "popdyn/basin.hpp"
#include "popdyn/errors.hpp"
#include "popdyn/stability.hpp"

using namespace popdyn;

namespace {

// Logistic map, used to cross-check the quartic as its second iterate.
double logistic(double s, double x) { return s * x * (1 - x); }

}  // namespace

TEST_CASE("quartic map is the second iterate of the logistic map") {
    for (double s : {2.0, 3.0, 3.1, 3.7}) {
        const PolyMapParams p(s);
        for (double x : {0.0, 0.1, 0.37, 0.558, 0.9, 1.3, -0.4}) {
            CHECK(step_poly(p, x) == doctest::Approx(logistic(s, logistic(s, x))).epsilon(1e-13));
        }
    }
    CHECK(step_poly(PolyMapParams(3.1), 0.0) == 0.0);
}

TEST_CASE("quartic fixed points near 0.558 and 0.7646") {
    const PolyMapParams p(3.1);
    CHECK(step_poly(p, 0.558) == doctest::Approx(0.558).epsilon(1e-3));
    CHECK(step_poly(p, 0.7646) == doctest::Approx(0.7646).epsilon(1e-3));

    const auto pts = poly_fixed_points(p);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].x == 0.0);
    CHECK(pts[1].origin == PolyRoot::LowerPair);
    CHECK(std::abs(pts[1].x - 0.558) < 5e-4);
    CHECK(pts[2].origin == PolyRoot::Logistic);
    CHECK(pts[2].x == doctest::Approx(1 - 1 / 3.1));
    CHECK(pts[3].origin == PolyRoot::UpperPair);
    CHECK(std::abs(pts[3].x - 0.7646) < 5e-4);
    for (const auto& fp : pts) CHECK(std::abs(step_poly(p, fp.x) - fp.x) < 1e-12);
}

TEST_CASE("quartic fixed points at s = 3 and s = 2") {
    auto pts = poly_fixed_points(PolyMapParams(3.0));
    // Pair roots merge with the logistic point 2/3 at s = 3.
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].x == doctest::Approx(2.0 / 3.0));

    pts = poly_fixed_points(PolyMapParams(2.0));
    for (const auto& fp : pts) {
        CHECK(fp.origin != PolyRoot::LowerPair);
        CHECK(fp.origin != PolyRoot::UpperPair);
    }
    CHECK(pts.front().x == 0.0);
}

TEST_CASE("quartic derivative") {
    const PolyMapParams p(3.1);
    const double h = 1e-6;
    for (double x : {0.1, 0.5, 0.77}) {
        const double fd = (step_poly(p, x + h) - step_poly(p, x - h)) / (2 * h);
        CHECK(derivative_poly(p, x) == doctest::Approx(fd).epsilon(1e-7));
    }
    // The lower pair point is locally stable.
    const double xs = poly_fixed_points(p)[1].x;
    CHECK(std::abs(derivative_poly(p, xs)) < 1.0);
}

TEST_CASE("find_fixed_points") {
    auto fps = find_fixed_points(as_map(Model(SingleParams(1.999, 0.8))), Box{{0, 3}, std::nullopt});
    REQUIRE(fps.size() == 2);
    CHECK(fps[0].x == doctest::Approx(0.0));
    CHECK(fps[1].x == doctest::Approx(std::log(0.999 / 0.8)).epsilon(1e-10));

    fps = find_fixed_points(as_map(PolyMapParams(3.1)), Box{{0, 1}, std::nullopt});
    const auto closed = poly_fixed_points(PolyMapParams(3.1));
    REQUIRE(fps.size() == closed.size());
    for (std::size_t i = 0; i < fps.size(); ++i) CHECK(std::abs(fps[i].x - closed[i].x) < 1e-9);

    const PairParams pp(5, 2, 0.1, 0.61, 3);
    fps = find_fixed_points(as_map(Model(pp)), Box{{0, 2}, Interval{0, 2}}, 24);
    const State e2 = *interior_equilibrium(pp);
    bool found = false;
    for (const State& s : fps) found = found || (std::abs(s.x - e2.x) < 1e-8 && std::abs(s.y - e2.y) < 1e-8);
    CHECK(found);

    CHECK_THROWS_AS(find_fixed_points(as_map(PolyMapParams(3.1)), Box{{1, 1}, std::nullopt}), ArgumentError);
}

TEST_CASE("basin scan: extinction is almost-GAS for r < k + 1") {
    BasinConfig cfg;
    cfg.box = Box{{0, 5}, std::nullopt};
    const BasinReport rep = basin_scan(as_map(Model(SingleParams(1.5, 1.0))), cfg, State{});
    CHECK(rep.verdict == BasinVerdict::AlmostGasConsistent);
    CHECK(rep.gas_consistent);
    CHECK(rep.n_samples == 200);
    CHECK(rep.n_converged + rep.n_other_attractor + rep.n_escaped == rep.n_samples);
    CHECK(rep.interior_coverage == 1.0);
    CHECK_FALSE(rep.witness.has_value());
}

TEST_CASE("basin scan: the quartic's lower fixed point is only locally stable") {
    const PolyMapParams p(3.1);
    const double xs = poly_fixed_points(p)[1].x;
    BasinConfig cfg;
    cfg.box = Box{{0, 1}, std::nullopt};
    const DynamicalMap map = as_map(p);
    const BasinReport rep = basin_scan(map, cfg, State{xs, 0.0});
    CHECK(rep.verdict == BasinVerdict::Refuted);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->interior);
    CHECK(rep.n_converged > 0);
    CHECK(rep.interior_coverage < 1.0);
    // Re-running the witness reproduces non-convergence.
    const BasinSample again = classify_sample(map, cfg, State{xs, 0.0}, rep.witness->x0);
    CHECK(again.outcome != SampleOutcome::Converged);
    CHECK(again.outcome == rep.witness->outcome);
}

TEST_CASE("basin scan: a source target is never almost-GAS") {
    // r > k + 1 makes the origin a source.
    const SingleParams p(3.0, 0.5);
    REQUIRE(classify_single_theorem(p, SingleEquilibrium::Trivial).tag == StabilityTag::Source);
    BasinConfig cfg;
    cfg.box = Box{{0, 4}, std::nullopt};
    cfg.grid = 2;
    cfg.interior_margin = 1e-6;
    cfg.probes = {State{1e-4, 0.0}};
    const BasinReport rep = basin_scan(as_map(Model(p)), cfg, State{});
    CHECK(rep.verdict == BasinVerdict::Refuted);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->x0.x == 1e-4);
}

TEST_CASE("basin scan preconditions and config validation") {
    BasinConfig cfg;
    cfg.box = Box{{0, 1}, std::nullopt};
    CHECK_THROWS_AS(basin_scan(as_map(PolyMapParams(3.1)), cfg, State{0.3, 0.0}), PreconditionError);
    cfg.grid = 1;
    CHECK_THROWS_AS(basin_scan(as_map(PolyMapParams(3.1)), cfg, State{}), ArgumentError);
    cfg.grid = 10;
    cfg.box = Box{{0, 1}, Interval{0, 1}};
    CHECK_THROWS_AS(basin_scan(as_map(PolyMapParams(3.1)), cfg, State{}), ArgumentError);
}

TEST_CASE("basin scan is deterministic and GAS implies almost-GAS") {
    const PairParams pp(5, 2, 0.1, 0.61, 3);
    BasinConfig cfg;
    cfg.box = Box{{0.2, 1.0}, Interval{0.5, 2.0}};
    cfg.grid = 12;
    const DynamicalMap map = as_map(Model(pp));
    const State e2 = *interior_equilibrium(pp);
    const BasinReport a = basin_scan(map, cfg, e2);
    const BasinReport b = basin_scan(map, cfg, e2);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].outcome == b.samples[i].outcome);
        CHECK(a.samples[i].iterations == b.samples[i].iterations);
    }
    if (a.gas_consistent) CHECK(a.verdict == BasinVerdict::AlmostGasConsistent);
    CHECK(a.n_samples == 144);
}
