#include "minsky/dynamics.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "minsky/errors.hpp"
#include "minsky/rng.hpp"

using namespace minsky;

namespace {

ModelParams table_params() {
    ModelParams p;
    p.mu = -0.76;
    p.beta = 1.29;
    p.alpha1 = -1.235;
    p.alpha2 = 0.78;
    p.i_min = 2.42;
    p.i_max = 49.0;
    return p;
}

SystemState state_at(double rate, std::int64_t n_tot = 100000) {
    SystemState s;
    s.rate = rate;
    s.n_tot = n_tot;
    return s;
}

}  // namespace

TEST_CASE("loans fraction follows the bounded power law") {
    const auto p = table_params();
    CHECK(loans_fraction(5.0, p) == doctest::Approx(0.576079571465620).epsilon(1e-12));
    // At the lower bound everyone takes loans; below it the share clamps to 1.
    CHECK(loans_fraction(2.42, p) == doctest::Approx(1.0));
    CHECK(loans_fraction(1.0, p) == 1.0);
}

TEST_CASE("ponzi fraction round-trips through the rate map") {
    auto p = table_params();
    CHECK(ponzi_fraction(12.9684461928440199, p) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(ponzi_fraction(49.0, p) == doctest::Approx(1.0));
    CHECK(ponzi_fraction(60.0, p) == 1.0);  // clamped above the upper bound
}

TEST_CASE("rate maps reproduce hand-computed values") {
    const auto p = table_params();
    CHECK(rate_from_loans(0.62, p) == doctest::Approx(4.36728595977883).epsilon(1e-12));
    CHECK(rate_from_ponzi(0.15, p) == doctest::Approx(11.1569956073627).epsilon(1e-12));
}

TEST_CASE("parameter validation rejects broken invariants") {
    auto p = table_params();
    p.mu = 0.5;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = table_params();
    p.beta = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = table_params();
    p.i_min = 50.0;  // above i_max
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = table_params();
    p.i_min = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    CHECK_NOTHROW(table_params().validate());
}

TEST_CASE("one crisis step applies the log-linear law") {
    const auto p = table_params();
    const auto s = state_at(12.9684461928440199);
    const auto next = step(s, Regime::CrisisAccelerator, p);
    CHECK(next.t == 1);
    CHECK(next.ponzi_density == doctest::Approx(0.18).epsilon(1e-12));
    // y' = (alpha2*beta) * y in y = ln(rate/i_max) space.
    const double y0 = std::log(s.rate / p.i_max);
    const double y1 = std::log(next.rate / p.i_max);
    CHECK(y1 == doctest::Approx(p.alpha2 * p.beta * y0).epsilon(1e-12));
    CHECK_FALSE(next.clamped);
}

TEST_CASE("one loans step applies the log-linear law") {
    const auto p = table_params();
    const auto s = state_at(5.0);
    const auto next = step(s, Regime::LoansAccelerator, p);
    CHECK(next.loans_fraction == doctest::Approx(0.576079571465620).epsilon(1e-12));
    const double y0 = std::log(s.rate / p.i_min);
    const double y1 = std::log(next.rate / p.i_min);
    CHECK(y1 == doctest::Approx(p.alpha1 * p.mu * y0).epsilon(1e-12));
    CHECK_FALSE(next.clamped);
}

TEST_CASE("log-linear law holds for random parameter draws in both regimes") {
    Rng rng(2024, 1);
    for (int k = 0; k < 200; ++k) {
        ModelParams p;
        p.mu = -rng.uniform(0.3, 2.0);
        p.beta = rng.uniform(0.5, 2.0);
        p.alpha1 = rng.uniform(-1.5, 1.5);
        p.alpha2 = rng.uniform(0.2, 1.5);
        p.i_min = rng.uniform(0.5, 5.0);
        p.i_max = p.i_min + rng.uniform(5.0, 60.0);
        // strict interior rate: neither fraction clamps
        const double rate = p.i_min + rng.uniform01_open_min() * (p.i_max - p.i_min) * 0.98;

        const auto crisis = step(state_at(rate), Regime::CrisisAccelerator, p);
        CHECK(std::log(crisis.rate / p.i_max) ==
              doctest::Approx(p.alpha2 * p.beta * std::log(rate / p.i_max))
                  .epsilon(1e-9));

        const auto loans = step(state_at(rate), Regime::LoansAccelerator, p);
        CHECK(std::log(loans.rate / p.i_min) ==
              doctest::Approx(p.alpha1 * p.mu * std::log(rate / p.i_min))
                  .epsilon(1e-9));
    }
}

TEST_CASE("twelve crisis steps replay the frozen trajectory") {
    const auto p = table_params();
    auto s = state_at(12.9684461928440199);
    for (int k = 0; k < 12; ++k) s = step(s, Regime::CrisisAccelerator, p);
    CHECK(s.t == 12);
    CHECK(s.ponzi_density == doctest::Approx(0.159543066446331).epsilon(1e-12));
    CHECK(s.rate == doctest::Approx(11.7068719845).epsilon(1e-9));
    // The year ends inside the observed benchmark density band.
    CHECK(s.ponzi_density > 0.14);
    CHECK(s.ponzi_density < 0.16);
}

TEST_CASE("clamping sets the flag and keeps fractions in range") {
    const auto p = table_params();
    const auto below = step(state_at(1.0), Regime::LoansAccelerator, p);
    CHECK(below.loans_fraction == 1.0);
    CHECK(below.clamped);

    const auto above = step(state_at(60.0), Regime::CrisisAccelerator, p);
    CHECK(above.ponzi_density == 1.0);
    CHECK(above.clamped);

    const auto inside = step(state_at(12.0), Regime::CrisisAccelerator, p);
    CHECK_FALSE(inside.clamped);
}

TEST_CASE("crisis step preserves the population partition") {
    const auto p = table_params();
    auto s = state_at(45.0, 1000);
    s.n_hedge = 900;
    const auto next = step(s, Regime::CrisisAccelerator, p);
    CHECK(next.n_ponzi + next.n_hedge <= next.n_tot);
    CHECK_NOTHROW(next.validate());
}

TEST_CASE("stability classification splits at the unit product") {
    CHECK(classify_stability(0.976, 0.001).kind == Stability::Convergent);
    CHECK(classify_stability(0.997, 0.001).kind == Stability::Convergent);
    CHECK(classify_stability(0.996, 0.001).kind == Stability::Convergent);
    CHECK(classify_stability(0.907, 0.001).kind == Stability::Convergent);
    CHECK(classify_stability(1.023, 0.005).kind == Stability::Divergent);
    CHECK(classify_stability(1.017, 0.005).kind == Stability::Divergent);
    CHECK(classify_stability(1.007, 0.005).kind == Stability::Divergent);
    CHECK(classify_stability(1.006, 0.01).kind == Stability::Marginal);
    CHECK(classify_stability(1.001, 0.01).kind == Stability::Marginal);
    CHECK(classify_stability(1.003, 0.01).kind == Stability::Marginal);
    // Sign does not matter: the magnitude governs the cobweb.
    CHECK(classify_stability(-0.5).kind == Stability::Convergent);
    CHECK(classify_stability(-1.5).kind == Stability::Divergent);
    CHECK(classify_stability(1.0).kind == Stability::Marginal);
}

TEST_CASE("stable product contracts the gap, unstable product escalates") {
    auto p = table_params();
    p.alpha2 = 0.5;  // product 0.645, convergent
    auto s = state_at(20.0);
    double gap = std::fabs(std::log(s.rate / p.i_max));
    for (int k = 0; k < 8; ++k) {
        s = step(s, Regime::CrisisAccelerator, p);
        const double next_gap = std::fabs(std::log(s.rate / p.i_max));
        CHECK(next_gap < gap);
        gap = next_gap;
    }

    p.alpha2 = 1.1;  // product 1.419, divergent
    s = state_at(20.0);
    gap = std::fabs(std::log(s.rate / p.i_max));
    for (int k = 0; k < 8; ++k) {
        s = step(s, Regime::CrisisAccelerator, p);
        const double next_gap = std::fabs(std::log(s.rate / p.i_max));
        CHECK(next_gap > gap);
        gap = next_gap;
    }
}

TEST_CASE("trajectory length and determinism") {
    const auto p = table_params();
    std::vector<SchedulePeriod> schedule{{"y1", Regime::CrisisAccelerator, p},
                                         {"y2", Regime::LoansAccelerator, p}};
    const auto s0 = state_at(12.7, 589141);
    const auto a = run_trajectory(s0, schedule, 12);
    const auto b = run_trajectory(s0, schedule, 12);
    REQUIRE(a.size() == 25);
    CHECK(a.front().rate == 12.7);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].rate == b[k].rate);
        CHECK(a[k].ponzi_density == b[k].ponzi_density);
        CHECK(a[k].loans_fraction == b[k].loans_fraction);
        CHECK(a[k].n_ponzi == b[k].n_ponzi);
        CHECK(a[k].t == static_cast<int>(k));
    }
}

TEST_CASE("zero steps echoes the initial state") {
    const auto p = table_params();
    const auto s0 = state_at(12.7);
    const auto traj = run_trajectory(s0, {{"noop", Regime::CrisisAccelerator, p}}, 0);
    REQUIRE(traj.size() == 1);
    CHECK(traj[0].rate == s0.rate);
}

TEST_CASE("count rounding is half to even and clamped") {
    CHECK(count_from_fraction(0.5, 5) == 2);   // 2.5 rounds to even 2
    CHECK(count_from_fraction(0.5, 7) == 4);   // 3.5 rounds to even 4
    CHECK(count_from_fraction(0.0, 10) == 0);
    CHECK(count_from_fraction(1.0, 10) == 10);
    CHECK(count_from_fraction(0.18, 589141) == 106045);
    CHECK(count_from_fraction(2.0, 10) == 10);   // clamped
    CHECK(count_from_fraction(-0.5, 10) == 0);   // clamped
}

TEST_CASE("state validation rejects inconsistent counts") {
    SystemState s = state_at(10.0, 100);
    s.n_ponzi = 60;
    s.n_hedge = 50;  // 110 > 100
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s.n_hedge = 40;
    CHECK_NOTHROW(s.validate());
    s.ponzi_density = 1.5;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}
