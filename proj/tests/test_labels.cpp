#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "pm/labels.hpp"

using namespace pm;

TEST_CASE("bridge: forced and enumerated small cases") {
    auto rng = Rng::derive({11, 0});
    CHECK(sample_bridge(1, rng).values == std::vector<std::int64_t>{0});

    // k = 2: exactly the three bridges (-1,0), (0,0), (1,0)
    std::map<std::vector<std::int64_t>, int> seen;
    for (int i = 0; i < 30000; ++i) ++seen[sample_bridge(2, rng).values];
    CHECK(seen.size() == 3);
    for (const auto& [v, c] : seen) {
        CHECK(v.size() == 2);
        CHECK(v[1] == 0);
        CHECK(v[0] >= -1);
        CHECK(v[0] <= 1);
    }
}

TEST_CASE("bridge: chi-squared uniformity for k = 2, 3") {
    auto rng = Rng::derive({11, 1});
    for (std::int64_t k : {2, 3}) {
        const auto support = oracle::all_bridge_increments(k);
        const auto m = static_cast<std::int64_t>(support.size());
        CHECK(m == (k == 2 ? 3 : 10));  // C(2k-1, k-1)
        std::map<std::vector<std::int64_t>, int> counts;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const auto b = sample_bridge(k, rng);
            // recover increments to index into the enumeration
            std::vector<std::int64_t> inc(k);
            std::int64_t prev = 0;
            for (std::int64_t j = 0; j < k; ++j) {
                inc[j] = b.values[j] - prev;
                prev = b.values[j];
                CHECK(inc[j] >= -1);
            }
            ++counts[inc];
        }
        CHECK(static_cast<std::int64_t>(counts.size()) == m);
        double chi2 = 0.0;
        const double e = n / double(m);
        for (const auto& [inc, c] : counts) chi2 += (c - e) * (c - e) / e;
        // p > 0.001 thresholds for 2 and 9 dof
        CHECK(chi2 < (k == 2 ? 13.82 : 27.88));
    }
}

TEST_CASE("bridge matches the conditioned-walk law") {
    // i.i.d. steps P(s) = 2^-(s+2) on {-1,0,1,...} conditioned to sum to 0
    // give the uniform bridge; compare empirical laws at k = 3.
    auto rng = Rng::derive({11, 2});
    auto geometric_step = [&]() {
        std::int64_t s = -1;
        while (rng.next_double() < 0.5) ++s;
        return s;
    };
    std::map<std::vector<std::int64_t>, int> walk_counts;
    int accepted = 0;
    while (accepted < 50000) {
        std::vector<std::int64_t> inc{geometric_step(), geometric_step(), geometric_step()};
        if (inc[0] + inc[1] + inc[2] != 0) continue;
        ++walk_counts[inc];
        ++accepted;
    }
    const double e = accepted / 10.0;
    double chi2 = 0.0;
    for (const auto& [inc, c] : walk_counts) chi2 += (c - e) * (c - e) / e;
    CHECK(walk_counts.size() == 10);
    CHECK(chi2 < 27.88);
}

TEST_CASE("bridge marginal variance formula") {
    CHECK(bridge_marginal_variance(4, 2) == doctest::Approx(8.0 / 5.0).epsilon(1e-15));
    CHECK(bridge_marginal_variance(4, 4) == 0.0);
    double total = 0.0;
    for (std::int64_t j = 1; j <= 5; ++j) total += bridge_marginal_variance(5, j);
    CHECK(total == doctest::Approx(20.0 / 3.0).epsilon(1e-15));
    CHECK(total == doctest::Approx(5.0 * 4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("bridge marginals: centred, variance matches the closed form") {
    auto rng = Rng::derive({11, 3});
    const std::int64_t k = 6;
    const int n = 100000;
    std::vector<double> sum(k, 0.0), sumsq(k, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto b = sample_bridge(k, rng);
        for (std::int64_t j = 0; j < k; ++j) {
            sum[j] += static_cast<double>(b.values[j]);
            sumsq[j] += static_cast<double>(b.values[j]) * b.values[j];
        }
    }
    for (std::int64_t j = 1; j <= k; ++j) {
        const double mean = sum[j - 1] / n;
        const double var = sumsq[j - 1] / n - mean * mean;
        const double target = bridge_marginal_variance(k, j);
        const double se_mean = std::sqrt(std::max(var, 1e-12) / n);
        CHECK(std::abs(mean) < 3.0 * se_mean + 1e-9);
        // SE of a variance estimate ~ var * sqrt(2/n) for near-Gaussian data
        CHECK(std::abs(var - target) < 3.0 * (target + 0.1) * std::sqrt(2.0 / n) + 1e-9);
    }
}

TEST_CASE("labelling invariants, exact, on random trees") {
    const OffspringLaw mu({0.5, 0.0, 0.5}, std::nullopt);
    auto rng = Rng::derive({11, 4});
    int done = 0;
    while (done < 300) {
        const auto t = sample_bgw(mu, rng, 1 << 16);
        if (!t) continue;
        ++done;
        const auto lt = label_tree(*t, rng);
        CHECK(lt.labels[0] == 0);
        const auto par = t->parents();
        const auto size = t->subtree_sizes();
        for (std::int64_t u = 0; u < t->vertex_count(); ++u) {
            if (t->k[u] == 0) continue;
            // children of u in lex order
            std::int64_t c = u + 1, prev_label = lt.labels[u], x = 0;
            for (std::int64_t j = 0; j < t->k[u]; ++j) {
                const std::int64_t inc = lt.labels[c] - prev_label;
                CHECK(inc >= -1);
                x += inc;
                prev_label = lt.labels[c];
                c += size[c];
            }
            CHECK(x == 0);  // bridge ends at 0: last child label = parent label
        }
        // rightmost branch carries only zeros
        std::int64_t v = 0;
        while (t->k[v] > 0) {
            std::int64_t c = v + 1;
            for (std::int64_t j = 1; j < t->k[v]; ++j) c += size[c];
            CHECK(lt.labels[c] == lt.labels[v]);
            v = c;
        }
        CHECK(lt.labels[v] == 0);
        (void)par;
    }
}

TEST_CASE("forced labellings on tiny trees") {
    auto rng = Rng::derive({11, 5});
    // path of length 1: the single child label is forced to 0
    for (int i = 0; i < 50; ++i) {
        const auto lt = label_tree(PlaneTree{{1, 0}}, rng);
        CHECK(lt.labels == std::vector<std::int64_t>{0, 0});
    }
    // cherry: first child uniform on {-1,0,1}, second child 0
    std::map<std::int64_t, int> first;
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        const auto lt = label_tree(PlaneTree{{2, 0, 0}}, rng);
        CHECK(lt.labels[2] == 0);
        ++first[lt.labels[1]];
    }
    CHECK(first.size() == 3);
    for (const auto& [v, c] : first)
        CHECK(std::abs(c / double(n) - 1.0 / 3.0) < 3.0 * std::sqrt((1.0 / 3) * (2.0 / 3) / n));
}

TEST_CASE("star-tree child variances match sigma^2_{k,j}") {
    auto rng = Rng::derive({11, 6});
    const std::int64_t k = 5;
    PlaneTree star{std::vector<std::int64_t>(k + 1, 0)};
    star.k[0] = k;
    const int n = 100000;
    std::vector<double> sumsq(k, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto lt = label_tree(star, rng);
        for (std::int64_t j = 1; j <= k; ++j)
            sumsq[j - 1] += static_cast<double>(lt.labels[j]) * lt.labels[j];
    }
    for (std::int64_t j = 1; j <= k; ++j) {
        const double var = sumsq[j - 1] / n;
        const double target = bridge_marginal_variance(k, j);
        CHECK(std::abs(var - target) < 3.0 * (target + 0.1) * std::sqrt(2.0 / n) + 1e-9);
    }
}

TEST_CASE("label process") {
    LabelledTree lt;
    lt.tree = PlaneTree{{0}};
    lt.labels = {0};
    CHECK(label_process(lt).values == std::vector<std::int64_t>{0});

    lt.tree = PlaneTree{{2, 0, 0}};
    lt.labels = {0, -1, 0};
    const auto p = label_process(lt);
    CHECK(p.values == std::vector<std::int64_t>{0, -1, 0});
    CHECK(p.kind == PathKind::label);
}
