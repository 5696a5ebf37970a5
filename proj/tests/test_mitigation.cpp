#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fairgf/metrics.hpp"
#include "fairgf/mitigation.hpp"
#include "fairgf/rng.hpp"
#include "test_support.hpp"

using namespace fairgf;

TEST_CASE("mult transform on one node per group") {
    NodeMask s{1, 0};
    auto out = mult_transform({0.2, 0.8}, s, 0.5);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("already-fair input is a fixed point up to the mass scale") {
    NodeMask s{1, 1, 0, 0};
    GraphSignal r{0.1, 0.2, 0.3, 0.4};
    const double mass_in = 0.3, total = 1.0;
    auto out = mult_transform(r, s, mass_in / total, MassScale::MatchInput);
    for (std::size_t v = 0; v < 4; ++v) {
        CHECK(out[v] == doctest::Approx(r[v]).epsilon(1e-12));
    }
}

TEST_CASE("mult transform hits the exact phi split and prule") {
    Rng rng(401);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 6 + rng.index(20);
        auto r = testsup::random_signal(rng, n, 0.05, 1.0);
        NodeMask s(n, 0);
        for (std::size_t v = 0; v < n / 2; ++v) s[v] = 1;
        const std::size_t members = mask_count(s);

        // parity target: phi = |S| / |V|
        double phi = static_cast<double>(members) / static_cast<double>(n);
        auto out = mult_transform(r, s, phi);
        CHECK(prule(out, s) == doctest::Approx(1.0).epsilon(1e-12));

        // arbitrary split
        double phi2 = rng.uniform(0.1, 0.9);
        auto out2 = mult_transform(r, s, phi2);
        CHECK(prule(out2, s) ==
              doctest::Approx(prule_of_phi_split(phi2, members, n)).epsilon(1e-10));
        double sum = std::accumulate(out2.begin(), out2.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mult transform preserves within-group ordering exactly") {
    Rng rng(402);
    std::size_t n = 40;
    auto r = testsup::random_signal(rng, n);
    NodeMask s(n, 0);
    for (std::size_t v = 0; v < n; ++v) s[v] = rng.uniform() < 0.4;
    if (mask_count(s) == 0) s[0] = 1;
    auto out = mult_transform(r, s, 0.3);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (s[u] != s[v]) continue;
            CHECK((r[u] < r[v]) == (out[u] < out[v]));
        }
    }
}

TEST_CASE("mult transform rejects zero-mass groups") {
    NodeMask s{1, 0};
    CHECK_THROWS_AS(mult_transform({0.0, 1.0}, s, 0.5), std::domain_error);
    CHECK_THROWS_AS(mult_transform({1.0, 0.0}, s, 0.5), std::domain_error);
    CHECK_THROWS_AS(mult_transform({0.5, 0.5}, s, 0.0), std::invalid_argument);
}

TEST_CASE("lfpro leaves already-fair input unchanged") {
    NodeMask s{1, 0};
    GraphSignal fair{0.5, 0.5};
    auto res = lfpro(fair, s, 1.0);
    CHECK(res.scores == fair);
    CHECK(res.converged);
    CHECK(res.iterations == 0);
}

TEST_CASE("lfpro balances the two-node case") {
    NodeMask s{1, 0};
    auto res = lfpro({0.25, 0.75}, s, 1.0);
    CHECK(res.converged);
    CHECK(res.scores[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.scores[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.final_prule == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lfpro never overshoots a target below the input prule") {
    NodeMask s{1, 0};
    GraphSignal r{0.45, 0.55};  // prule ~ 0.818
    auto res = lfpro(r, s, 0.5);
    CHECK(res.scores == r);  // target already met
    CHECK(res.converged);
}

TEST_CASE("lfpro conserves mass, keeps scores non-negative, never decreases prule") {
    Rng rng(403);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 20;
        GraphSignal r(n);
        for (auto& v : r) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        NodeMask s(n, 0);
        for (std::size_t v = 0; v < n; ++v) s[v] = rng.uniform() < 0.35;
        if (mask_count(s) == 0) s[0] = 1;
        if (mask_count(s) == n) s[n - 1] = 0;

        double before = std::accumulate(r.begin(), r.end(), 0.0);
        if (before == 0.0) continue;
        auto res = lfpro(r, s, 1.0);

        double after = std::accumulate(res.scores.begin(), res.scores.end(), 0.0);
        CHECK(after == doctest::Approx(before).epsilon(1e-10));
        for (double v : res.scores) CHECK(v >= 0.0);

        double last = prule(r, s);
        for (double p : res.prule_trace) {
            CHECK(p >= last - 1e-12);
            last = p;
        }
        CHECK(res.final_prule >= prule(r, s) - 1e-12);
    }
}

TEST_CASE("lfpro redistributes into a zero-mass group uniformly") {
    NodeMask s{1, 1, 0};
    GraphSignal r{0.0, 0.0, 0.9};
    auto res = lfpro(r, s, 1.0);
    CHECK(res.converged);
    CHECK(res.scores[0] == doctest::Approx(res.scores[1]).epsilon(1e-12));
    CHECK(res.final_prule == doctest::Approx(1.0).epsilon(1e-9));
    double total = res.scores[0] + res.scores[1] + res.scores[2];
    CHECK(total == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("lfpro reports non-convergence at a tiny iteration budget") {
    NodeMask s{1, 0, 0};
    auto res = lfpro({0.0, 0.5, 0.5}, s, 1.0, 1e-12, 3);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 3);
}
