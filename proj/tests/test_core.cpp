#include "doctest.h"
#include "ffire/types.hpp"

using namespace ffire;

TEST_CASE("reconstruct: zero flow returns v0 unchanged") {
    const auto v0 = SizeDistribution::monodisperse(4);
    FlowRecord flow;
    const auto v = reconstruct_from_flow(v0, flow, 4);
    CHECK(v.v[1] == 1.0);
    CHECK(v.mass() == 1.0);
}

TEST_CASE("reconstruct: one sigma_{1,1} merge on 4 vertices") {
    // hand enumeration: 4 singletons, merge two of them -> V = (2,2,0,0)
    const auto v0 = SizeDistribution::monodisperse(4);
    FlowRecord flow;
    flow.record_coagulation(1, 1);  // stores q(1,1) = 2 per the (1+1{k=l}) rule
    CHECK(flow.q.at(FlowRecord::key(1, 1)) == 2);
    const auto v = reconstruct_from_flow(v0, flow, 4);
    CHECK(v.v[1] == doctest::Approx(0.5));
    CHECK(v.v[2] == doctest::Approx(0.5));
}

TEST_CASE("reconstruct: merge then burn the 2-cluster restores monodisperse") {
    const auto v0 = SizeDistribution::monodisperse(4);
    FlowRecord flow;
    flow.record_coagulation(1, 1);
    flow.record_burn(2);  // r_2 = 2
    CHECK(flow.r.at(2) == 2);
    const auto v = reconstruct_from_flow(v0, flow, 4);
    CHECK(v.v[1] == doctest::Approx(1.0));
    CHECK(v.truncation() >= 1);
    CHECK(v.mass() == doctest::Approx(1.0));
}

TEST_CASE("reconstruct: inconsistent flow raises a mismatch error") {
    const auto v0 = SizeDistribution::monodisperse(4);
    FlowRecord flow;
    flow.record_burn(2);  // no 2-cluster was ever built
    CHECK_THROWS_AS(reconstruct_from_flow(v0, flow, 4), FlowMismatchError);
}

TEST_CASE("flow record bookkeeping rules") {
    FlowRecord flow;
    flow.record_burn(1);  // singleton lightning is never recorded
    CHECK(flow.r.empty());
    flow.record_coagulation(3, 1);
    flow.record_coagulation(1, 3);  // symmetric key
    CHECK(flow.q.size() == 1);
    CHECK(flow.q.at(FlowRecord::key(1, 3)) == 2);
    CHECK(flow.coagulation_events() == 2);
    CHECK(flow.q_total() == 4);

    FlowRecord later = flow;
    later.record_coagulation(2, 2);
    later.record_burn(4);
    CHECK(flow.dominated_by(later));
    CHECK_FALSE(later.dominated_by(flow));
}

TEST_CASE("size distribution accessors and invariants") {
    SizeDistribution d(4);
    d.v[1] = 0.5;
    d.v[2] = 0.25;
    d.v[4] = 0.125;
    d.theta = 0.125;
    CHECK(d.mass() == doctest::Approx(0.875));
    CHECK(d.moment(1) == doctest::Approx(0.5 + 0.5 + 0.5));
    CHECK(d.moment(2) == doctest::Approx(0.5 + 1.0 + 2.0));
    CHECK(d.tail_sum(2) == doctest::Approx(0.25 + 0.125 + 0.125));
    CHECK(d.tail_sum(1) == doctest::Approx(1.0));
    CHECK_NOTHROW(d.validate());
    d.v[3] = -1e-6;
    CHECK_THROWS_AS(d.validate(), NumericError);
    d.v[3] = 0.5;  // mass exceeds 1
    CHECK_THROWS_AS(d.validate(), NumericError);
}

TEST_CASE("regime spec validation") {
    RegimeSpec spec;
    spec.regime = Regime::FiniteN;
    spec.n = 1000;
    spec.lambda = LambdaRule::exponent(1.5);
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.lambda = LambdaRule::exponent(0.5);
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.lambda_value() == doctest::Approx(std::pow(1000.0, -0.5)));

    RegimeSpec ode;
    ode.regime = Regime::III;
    ode.K = 1;
    CHECK_THROWS_AS(ode.validate(), ConfigError);
    ode.K = 100;
    ode.dt = 0.0;
    CHECK_THROWS_AS(ode.validate(), ConfigError);
    ode.dt = 1e-3;
    CHECK_NOTHROW(ode.validate());

    RegimeSpec r2;
    r2.regime = Regime::II;
    r2.K = 100;
    r2.lambda = LambdaRule::fixed(100.0);
    r2.dt = 1e-3;  // lambda*dt > 0.01: jump thinning bias too large
    CHECK_THROWS_AS(r2.validate(), ConfigError);
    r2.lambda = LambdaRule::fixed(1.0);
    CHECK_NOTHROW(r2.validate());
}
