#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pm/continuum.hpp"

using namespace pm;

TEST_CASE("brownian_excursion: endpoints, positivity, grid") {
    auto rng = Rng::derive({51, 0});
    for (int rep = 0; rep < 50; ++rep) {
        const auto p = brownian_excursion(256, rng);
        CHECK(p.x.size() == 257);
        CHECK(p.x[0] == 0.0);
        CHECK(p.x[256] == 0.0);
        CHECK(*std::min_element(p.x.begin(), p.x.end()) >= 0.0);
        CHECK(p.x == p.h);
        CHECK(p.t[128] == doctest::Approx(0.5));
    }
}

TEST_CASE("brownian_excursion: midpoint mean matches a rejection oracle") {
    // a Brownian bridge conditioned to stay positive at interior grid points
    // has the law of the Vervaat-transformed bridge on the same grid
    const std::int64_t m = 512;
    auto rng = Rng::derive({51, 1});
    const double step_sd = std::sqrt(1.0 / static_cast<double>(m));

    const std::int64_t draws = 4000;
    double orac_sum = 0, orac_sq = 0;
    for (std::int64_t d = 0; d < draws;) {
        // sample the bridge as a scaled walk; reject early on a nonpositive
        // interior value of the bridge transform
        std::vector<double> w(m + 1);
        bool ok = true;
        for (std::int64_t j = 1; j <= m && ok; ++j) {
            w[j] = w[j - 1] + step_sd * rng.next_normal();
        }
        std::vector<double> bridge(m + 1);
        for (std::int64_t j = 1; j < m && ok; ++j) {
            bridge[j] = w[j] - (static_cast<double>(j) / static_cast<double>(m)) * w[m];
            if (bridge[j] <= 0) ok = false;
        }
        if (!ok) continue;
        const double v = std::sqrt(2.0) * bridge[m / 2];
        orac_sum += v;
        orac_sq += v * v;
        ++d;
    }
    const double orac_mean = orac_sum / static_cast<double>(draws);
    const double orac_var = orac_sq / static_cast<double>(draws) - orac_mean * orac_mean;

    double verv_sum = 0, verv_sq = 0;
    for (std::int64_t d = 0; d < draws; ++d) {
        const double v = brownian_excursion(m, rng).x[m / 2];
        verv_sum += v;
        verv_sq += v * v;
    }
    const double verv_mean = verv_sum / static_cast<double>(draws);
    const double verv_var = verv_sq / static_cast<double>(draws) - verv_mean * verv_mean;

    const double se = std::sqrt(orac_var / draws + verv_var / draws);
    CHECK(std::abs(orac_mean - verv_mean) < 3 * se);
}

TEST_CASE("snake_head: zero height, variance and covariance kernel") {
    auto rng = Rng::derive({51, 2});
    const std::vector<double> flat(33, 0.0);
    CHECK(snake_head(flat, rng) == std::vector<double>(33, 0.0));

    // tent-shaped height: Var L_t = (2/3) h_t, Cov = (2/3) min over [s, t]
    const std::int64_t m = 32;
    std::vector<double> tent(m + 1);
    for (std::int64_t j = 0; j <= m; ++j)
        tent[j] = static_cast<double>(std::min(j, m - j)) / static_cast<double>(m);
    const std::int64_t draws = 10000;
    const std::int64_t a = 8, b = 24;  // h = 0.25 at both, min between = 0.25
    double va = 0, vb = 0, cab = 0;
    for (std::int64_t d = 0; d < draws; ++d) {
        const auto l = snake_head(tent, rng);
        CHECK(std::abs(l[0]) < 1e-4);  // jitter-sized noise only
        va += l[a] * l[a];
        vb += l[b] * l[b];
        cab += l[a] * l[b];
    }
    va /= draws;
    vb /= draws;
    cab /= draws;
    const double target = (2.0 / 3.0) * 0.25;
    // 3 sigma for a chi-square style moment: sd approx value * sqrt(2/N)
    const double tol = 3 * target * std::sqrt(2.0 / draws);
    CHECK(std::abs(va - target) < tol);
    CHECK(std::abs(vb - target) < tol);
    CHECK(std::abs(cab - target) < tol);

    CHECK_THROWS(snake_head(std::vector<double>(5000, 0.0), rng));
}

TEST_CASE("snake_head: strided evaluation uses fine-grid interval minima") {
    auto rng = Rng::derive({51, 7});
    // fine height with a dip between coarse points: h = [0, .5, 1, .1, 1, .5, 0]
    const std::vector<double> h = {0.0, 0.5, 1.0, 0.1, 1.0, 0.5, 0.0};
    // stride 2 -> coarse points at h[0], h[2], h[4], h[6]; the covariance of
    // l[1] and l[2] must see the fine-grid dip to 0.1
    const std::int64_t draws = 20000;
    double v1 = 0, c12 = 0;
    for (std::int64_t d = 0; d < draws; ++d) {
        const auto l = snake_head(h, rng, 2);
        REQUIRE(l.size() == 4);
        v1 += l[1] * l[1];
        c12 += l[1] * l[2];
    }
    v1 /= draws;
    c12 /= draws;
    const double tol = 3 * (2.0 / 3.0) * std::sqrt(2.0 / draws);
    CHECK(std::abs(v1 - (2.0 / 3.0) * 1.0) < tol);
    CHECK(std::abs(c12 - (2.0 / 3.0) * 0.1) < tol);

    CHECK_THROWS(snake_head(h, rng, 4));  // 6 steps, stride must divide
    CHECK_THROWS(snake_head(h, rng, 0));
}

TEST_CASE("stable_proxy_excursion: conditioning and excursion shape") {
    const auto mu = make_stable_offspring(1.5, 2);
    auto rng = Rng::derive({51, 3});
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = stable_proxy_excursion(mu, 500, rng);
        CHECK(p.provenance == Provenance::walk_proxy);
        CHECK(p.alpha == doctest::Approx(1.5));
        CHECK(p.x[0] == 0.0);
        CHECK(p.x.back() * p.b_m == doctest::Approx(-1.0));
        CHECK(*std::min_element(p.x.begin(), p.x.end()) >=
              -1.0 / p.b_m - 1e-12);
        CHECK(p.h[0] == 0.0);
        CHECK(p.h.back() == 0.0);
        CHECK(*std::min_element(p.h.begin(), p.h.end()) >= 0.0);
    }
}

TEST_CASE("stable_proxy_excursion: largest rescaled jump stable across m") {
    const auto mu = make_stable_offspring(1.5, 2);
    auto rng = Rng::derive({51, 4});
    const auto biggest_jump = [](const ContinuumPath& p) {
        double best = 0;
        for (std::size_t j = 1; j < p.x.size(); ++j)
            best = std::max(best, p.x[j] - p.x[j - 1]);
        return best;
    };
    std::vector<double> at_m, at_2m;
    for (int rep = 0; rep < 400; ++rep) {
        at_m.push_back(biggest_jump(stable_proxy_excursion(mu, 500, rng)));
        at_2m.push_back(biggest_jump(stable_proxy_excursion(mu, 1000, rng)));
    }
    CHECK(two_sample_ks(at_m, at_2m) < 0.1);
}

TEST_CASE("stable_label_field: empty sum, onset continuity, tail monotone") {
    const auto mu = make_stable_offspring(1.5, 2);
    auto rng = Rng::derive({51, 5});
    const auto p = stable_proxy_excursion(mu, 2000, rng);

    // with only the largest jump kept, the field is 0 up to and at the jump
    // time itself (the pinned bridge contributes b(1) = 0 at onset)
    const auto single = stable_label_field(p, 1, rng);
    CHECK(single.jumps_used == 1);
    std::int64_t j1 = 0;
    double best = 0;
    for (std::size_t j = 1; j < p.x.size(); ++j)
        if (p.x[j] - p.x[j - 1] > best) {
            best = p.x[j] - p.x[j - 1];
            j1 = static_cast<std::int64_t>(j);
        }
    for (std::int64_t j = 0; j <= j1; ++j) CHECK(single.l[j] == 0.0);

    const auto f1 = stable_label_field(p, 1, rng);
    const auto f3 = stable_label_field(p, 3, rng);
    const auto f10 = stable_label_field(p, 10, rng);
    CHECK(f1.tail_bound >= f3.tail_bound);
    CHECK(f3.tail_bound >= f10.tail_bound);
    CHECK(f10.l[0] == 0.0);

    // impossible threshold: zero field, everything reported in the tail
    const auto none = stable_label_field(p, 5, rng, 1e9);
    CHECK(none.jumps_used == 0);
    CHECK(none.l == std::vector<double>(p.x.size(), 0.0));
    CHECK(none.tail_bound == 0.0);
}

TEST_CASE("two_sample_ks: hand values") {
    CHECK(two_sample_ks({0, 1}, {0, 1}) == doctest::Approx(0.0));
    CHECK(two_sample_ks({0, 0}, {1, 1}) == doctest::Approx(1.0));
    CHECK(two_sample_ks({0, 1, 2, 3}, {0, 1}) == doctest::Approx(0.5));
}
