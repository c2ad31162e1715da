#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "hyperstab/errors.hpp"
#include "hyperstab/popov.hpp"

#include <cmath>
#include <random>

using namespace hyperstab;

TEST_CASE("device outputs") {
    const auto lin = fixtures::gain_device(0, 2.0);
    CHECK(lin.phi(1.5, 0.0) == doctest::Approx(3.0));
    CHECK(lin.passive_by_construction());
    CHECK(lin.monotone_in_y());

    const auto sec = fixtures::sector_device(0, 0.5, 2.0);
    // Built-in sector shape: phi/y = k1 + (k2 - k1)/(1 + y^2).
    CHECK(sec.phi(1.0, 0.0) == doctest::Approx(1.0 * (0.5 + 1.5 / 2.0)));
    CHECK(sec.passive_by_construction());

    FeedbackDevice sat;
    sat.kind = DeviceKind::Saturation;
    sat.k = 3.0;
    sat.limit = 1.0;
    CHECK(sat.phi(0.2, 0.0) == doctest::Approx(0.6));
    CHECK(sat.phi(5.0, 0.0) == doctest::Approx(1.0));
    CHECK(sat.phi(-5.0, 0.0) == doctest::Approx(-1.0));

    FeedbackDevice relay;
    relay.kind = DeviceKind::Relay;
    relay.threshold = 0.1;
    CHECK(relay.phi(0.05, 0.0) == 0.0);
    CHECK(relay.phi(0.5, 0.0) == 1.0);
    CHECK(relay.phi(-0.5, 0.0) == -1.0);
    CHECK(!relay.monotone_in_y());

    FeedbackDevice tvg;
    tvg.kind = DeviceKind::TimeVaryingGain;
    tvg.table_t = {0.0, 1.0, 2.0};
    tvg.table_v = {1.0, 0.5, 0.25};
    CHECK(tvg.phi(2.0, 0.5) == doctest::Approx(2.0));   // right-continuous step
    CHECK(tvg.phi(2.0, 1.5) == doctest::Approx(1.0));
    CHECK(tvg.phi(2.0, 9.0) == doctest::Approx(0.5));

    FeedbackDevice tab;
    tab.kind = DeviceKind::Tabulated;
    tab.table_t = {0.0, 2.0};
    tab.table_v = {0.0, 4.0};
    CHECK(tab.phi(123.0, 1.0) == doctest::Approx(2.0));  // y-independent, interpolated
    CHECK(!tab.passive_by_construction());
}

TEST_CASE("device validation") {
    FeedbackDevice bad_sector;
    bad_sector.kind = DeviceKind::Sector;
    bad_sector.k1 = 2.0;
    bad_sector.k2 = 1.0;
    CHECK_THROWS_AS(bad_sector.validate(), ConfigurationError);

    FeedbackDevice bad_gamma = fixtures::gain_device(0, 1.0);
    bad_gamma.gamma = 0.0;
    CHECK_THROWS_AS(bad_gamma.validate(), ConfigurationError);

    FeedbackDevice bad_table;
    bad_table.kind = DeviceKind::Tabulated;
    bad_table.table_t = {1.0, 0.0};
    bad_table.table_v = {0.0, 0.0};
    CHECK_THROWS_AS(bad_table.validate(), ConfigurationError);
}

TEST_CASE("sector devices stay passive pointwise") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> k1_dist(0.0, 2.0);
    std::uniform_real_distribution<double> width(0.0, 3.0);
    std::uniform_real_distribution<double> y_dist(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double k1 = k1_dist(rng);
        const double k2 = k1 + width(rng);
        const auto dev = fixtures::sector_device(0, k1, k2);
        for (int i = 0; i < 5000; ++i) {
            const double y = y_dist(rng);
            const double p = dev.phi(y, 0.0);
            CHECK(p * y >= 0.0);
            if (std::abs(y) > 1e-12) {
                const double slope = p / y;
                CHECK(slope >= k1 - 1e-12);
                CHECK(slope <= k2 + 1e-12);
            }
        }
    }
}

TEST_CASE("ledger tracks the integral and the floor crossing") {
    // phi = -y (active device), y = 1: integrand -1, crosses -gamma at t = 1.
    PopovLedger ledger(1.0);
    bool crossed = false;
    for (int k = 0; k < 200; ++k) {
        const double y = 1.0;
        const double phi = -1.0;
        ledger.update(y, phi, 0.01);
        if (ledger.violated_at && !crossed) {
            crossed = true;
            CHECK(*ledger.violated_at == doctest::Approx(1.0).epsilon(0.02));
        }
    }
    CHECK(crossed);
    CHECK(ledger.integral() == doctest::Approx(-2.0 + 0.005).epsilon(1e-6));

    CHECK_THROWS_AS(ledger.update(1.0, 1.0, 0.0), ParameterError);
}

TEST_CASE("interval and tail floor checks") {
    PopovLedger ledger(0.5);
    for (int k = 0; k < 100; ++k) ledger.update(1.0, -1.0, 0.01);  // integral -> -1

    const auto whole = interval_floor_check(ledger, 0.0, 1.0);
    CHECK(!whole.pass);
    CHECK(whole.first_violation_time.has_value());
    CHECK(*whole.first_violation_time == doctest::Approx(0.51).epsilon(0.05));

    const auto early = interval_floor_check(ledger, 0.0, 0.3);
    CHECK(early.pass);
    // Trapezoid ledger: cumulative at t = 0.3 is -0.295, margin 0.205.
    CHECK(early.min_margin == doctest::Approx(0.205).epsilon(1e-9));

    CHECK_THROWS_AS(interval_floor_check(ledger, 0.5, 3.0), CoverageError);
    CHECK_THROWS_AS(tail_floor_check(ledger, 0.2, false), ApplicabilityError);
    const auto tail = tail_floor_check(ledger, 0.9, true);
    CHECK(!tail.pass);
}

TEST_CASE("global inequality equals the per-interval decomposition") {
    // The floor holds on [0, t] for every t iff it holds on every window ending
    // at a sample, so the windowed checks and the running ledger must agree.
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> v_dist(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        PopovLedger ledger(0.4);
        for (int k = 0; k < 400; ++k) ledger.update(1.0, v_dist(rng), 0.01);

        const bool window_pass = interval_floor_check(ledger, 0.0, 4.0).pass;
        CHECK(window_pass == !ledger.violated_at.has_value());
        if (!window_pass) {
            const auto w = interval_floor_check(ledger, 0.0, 4.0);
            CHECK(*w.first_violation_time == doctest::Approx(*ledger.violated_at));
        }
    }
}
