#include "pm/continuum.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pm/trees.hpp"

namespace pm {

static std::vector<double> uniform_grid(std::int64_t m) {
    std::vector<double> t(m + 1);
    for (std::int64_t j = 0; j <= m; ++j)
        t[j] = static_cast<double>(j) / static_cast<double>(m);
    return t;
}

ContinuumPath brownian_excursion(std::int64_t m, Rng& rng) {
    if (m < 2) throw std::invalid_argument("invalid-input: grid must have m >= 2");
    // standard Brownian bridge on the grid
    std::vector<double> w(m + 1);
    const double step_sd = std::sqrt(1.0 / static_cast<double>(m));
    w[0] = 0;
    for (std::int64_t j = 1; j <= m; ++j) w[j] = w[j - 1] + step_sd * rng.next_normal();
    for (std::int64_t j = 0; j <= m; ++j)
        w[j] -= (static_cast<double>(j) / static_cast<double>(m)) * w[m];

    // Vervaat shift at the (a.s. unique) minimum
    const std::int64_t arg =
        std::min_element(w.begin(), w.end()) - w.begin();
    ContinuumPath p;
    p.t = uniform_grid(m);
    p.x.resize(m + 1);
    const double sqrt2 = std::sqrt(2.0);
    for (std::int64_t j = 0; j <= m; ++j)
        p.x[j] = sqrt2 * (w[(arg + j) % m] - w[arg]);
    p.h = p.x;
    p.alpha = 2.0;
    p.provenance = Provenance::exact_gaussian;
    return p;
}

std::vector<double> snake_head(const std::vector<double>& h, Rng& rng, std::int64_t stride) {
    const auto fine = static_cast<std::int64_t>(h.size());
    if (fine == 0) throw std::invalid_argument("invalid-input: empty height path");
    if (stride < 1 || (fine - 1) % stride != 0)
        throw std::invalid_argument("invalid-input: stride must divide the height grid");
    const std::int64_t n = (fine - 1) / stride + 1;
    if (n > 4097)
        throw std::invalid_argument("invalid-input: dense factorisation capped at 4096 steps");
    if (h[0] != 0) throw std::invalid_argument("invalid-input: height must start at 0");
    for (const double v : h)
        if (v < 0) throw std::invalid_argument("invalid-input: height must be nonnegative");

    // field at the coarse points i*stride; cov(i, j) = (2/3) * min of h over
    // the full fine interval [i*stride, j*stride] so that a coarse grid does
    // not overestimate the interval minima
    Eigen::MatrixXd cov(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        double running = h[i * stride];
        for (std::int64_t j = i; j < n; ++j) {
            for (std::int64_t f = std::max(i, j - 1) * stride + 1; f <= j * stride; ++f)
                running = std::min(running, h[f]);
            cov(i, j) = cov(j, i) = (2.0 / 3.0) * running;
        }
    }
    const double trace = cov.trace();
    if (trace == 0) return std::vector<double>(n, 0.0);

    double jitter = 1e-12 * trace / static_cast<double>(n);
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int tries = 0;; ++tries) {
        llt.compute(cov + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) break;
        if (tries >= 8)
            throw std::runtime_error(
                "numeric-failure: covariance factorisation failed at jitter " +
                std::to_string(jitter) + " (trace " + std::to_string(trace) + ")");
        jitter *= 10;
    }
    Eigen::VectorXd z(n);
    for (std::int64_t i = 0; i < n; ++i) z(i) = rng.next_normal();
    const Eigen::VectorXd l = llt.matrixL() * z;
    return std::vector<double>(l.data(), l.data() + n);
}

ContinuumPath stable_proxy_excursion(const OffspringLaw& mu, std::int64_t m,
                                     Rng& rng, std::int64_t max_attempts) {
    if (mu.alpha() >= 2.0)
        throw std::invalid_argument("invalid-input: walk proxy requires alpha < 2");
    if (m < 2) throw std::invalid_argument("invalid-input: grid must have m >= 2");

    // steps xi - 1 with xi ~ mu, resampled until the sum is -1
    std::vector<std::int64_t> steps(m);
    for (std::int64_t attempt = 0;; ++attempt) {
        if (attempt >= max_attempts)
            throw SampleError("sample-exhausted: walk resampling budget exceeded");
        std::int64_t sum = 0;
        for (auto& s : steps) {
            s = mu.sample(rng) - 1;
            sum += s;
        }
        if (sum == -1) break;
    }

    // Vervaat shift at the first minimum of the partial sums
    std::vector<std::int64_t> walk(m + 1);
    walk[0] = 0;
    std::int64_t arg = 0;
    for (std::int64_t j = 0; j < m; ++j) {
        walk[j + 1] = walk[j] + steps[j];
        if (walk[j + 1] < walk[arg]) arg = j + 1;
    }
    LatticePath shifted;
    shifted.kind = PathKind::lukasiewicz;
    shifted.values.resize(m + 1);
    shifted.values[0] = 0;
    for (std::int64_t j = 0; j < m; ++j)
        shifted.values[j + 1] = shifted.values[j] + steps[(arg + j) % m];

    const double b = normalizer(mu)(m);
    ContinuumPath p;
    p.t = uniform_grid(m);
    p.x.resize(m + 1);
    for (std::int64_t j = 0; j <= m; ++j)
        p.x[j] = static_cast<double>(shifted.values[j]) / b;

    const auto height = height_process(tree_from_lukasiewicz(shifted)).values;
    p.h.resize(m + 1);
    for (std::int64_t j = 0; j < m; ++j)
        p.h[j] = static_cast<double>(height[j]) * b / static_cast<double>(m);
    p.h[m] = 0;

    p.alpha = mu.alpha();
    p.provenance = Provenance::walk_proxy;
    p.b_m = b;
    return p;
}

LabelField stable_label_field(const ContinuumPath& x, std::int64_t k, Rng& rng,
                              double jump_threshold) {
    if (k < 1) throw std::invalid_argument("invalid-input: jump cutoff must be >= 1");
    const auto n = static_cast<std::int64_t>(x.x.size());
    if (n < 2) throw std::invalid_argument("invalid-input: path too short");

    // identified jumps: positive grid increments above the threshold
    std::vector<std::pair<double, std::int64_t>> jumps;  // (size, grid index)
    double jump_mass = 0;
    for (std::int64_t j = 1; j < n; ++j) {
        const double dx = x.x[j] - x.x[j - 1];
        if (dx > jump_threshold) {
            jumps.emplace_back(dx, j);
            jump_mass += dx;
        }
    }

    LabelField out;
    out.l.assign(n, 0.0);
    if (jumps.empty()) return out;  // zero field, nothing identified
    std::sort(jumps.begin(), jumps.end(), std::greater<>());
    if (static_cast<std::int64_t>(jumps.size()) > k) jumps.resize(k);
    out.jumps_used = static_cast<std::int64_t>(jumps.size());
    double used_mass = 0;
    for (const auto& [dx, j] : jumps) used_mass += dx;
    out.tail_bound = jump_mass - used_mass;

    const double sqrt2 = std::sqrt(2.0);
    for (const auto& [dx, j0] : jumps) {
        const double x_minus = x.x[j0 - 1];
        // bridge argument u_t = (inf over [t_i, t] of x - x_minus) / dx starts
        // at 1 and is nonincreasing, so the standard bridge pinned at 0 and 1
        // is sampled sequentially at decreasing arguments
        double inf = x.x[j0];
        double u_prev = 1.0, b_prev = 0.0;
        for (std::int64_t j = j0; j < n; ++j) {
            inf = std::min(inf, x.x[j]);
            const double u = (inf - x_minus) / dx;
            if (u <= 0) break;  // indicator stays 0 from here on
            if (u < u_prev) {
                // bridge value at u given the value at u_prev and b(0) = 0
                const double mean = b_prev * u / u_prev;
                const double var = u * (u_prev - u) / u_prev;
                b_prev = mean + std::sqrt(var) * rng.next_normal();
                u_prev = u;
            }
            out.l[j] += sqrt2 * std::sqrt(dx) * b_prev;
        }
    }
    return out;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("invalid-input: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                                 static_cast<double>(j) / static_cast<double>(b.size())));
    }
    return d;
}

}  // namespace pm
