#include "pm/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace pm {

namespace {

constexpr double kOverflowThreshold = 1e300;

// Sum_{j >= from} j^-alpha via explicit summation plus an Euler-Maclaurin
// tail, accurate to ~1e-15 for alpha in (1, 4].
double power_sum_tail(double alpha, std::int64_t from) {
    const std::int64_t big = std::max<std::int64_t>(from, 100000);
    double s = 0.0;
    for (std::int64_t j = big - 1; j >= from; --j) s += std::pow(static_cast<double>(j), -alpha);
    const double J = static_cast<double>(big);
    double tail = std::pow(J, 1.0 - alpha) / (alpha - 1.0);
    tail += 0.5 * std::pow(J, -alpha);
    tail -= alpha / 12.0 * std::pow(J, -alpha - 1.0);
    return s + tail;
}

}  // namespace

double log_binom_2km1(std::int64_t k) {
    if (k <= 0) return 0.0;  // C(-1,-1) = C(1,0) = 1 by convention
    if (k <= 30) return std::log(binom_2km1(k));
    return std::lgamma(2.0 * k) - std::lgamma(static_cast<double>(k)) -
           std::lgamma(k + 1.0) - std::log(2.0);
}

double binom_2km1(std::int64_t k) {
    if (k <= 0) return 1.0;
    if (k > 500) throw std::overflow_error("binom_2km1: use log_binom_2km1 beyond k=500");
    if (k <= 30) {
        // C(2k-1, k-1) = C(2k, k) / 2, exact in double up to k = 30.
        double c = 1.0;
        for (std::int64_t i = 1; i <= k; ++i)
            c = c * (k + i) / i;
        return c / 2.0;
    }
    return std::exp(log_binom_2km1(k));
}

double PowerTail::survival(std::int64_t j) const {
    return constant * std::pow(static_cast<double>(j), -alpha);
}

double PowerTail::pmf(std::int64_t k) const {
    return survival(k) - survival(k + 1);
}

void WeightSeq::validate() const {
    bool nontrivial = false;
    for (const auto& [k, v] : entries) {
        if (k < 1) throw std::invalid_argument("weight index must be >= 1");
        if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("weights must be finite and >= 0");
        if (k >= 2 && v > 0.0) nontrivial = true;
    }
    if (offspring_tail) nontrivial = true;
    if (!nontrivial)
        throw std::invalid_argument("trivial weight sequence: needs q_k > 0 for some k >= 2");
}

std::int64_t WeightSeq::max_support() const {
    std::int64_t m = 0;
    for (const auto& [k, v] : entries)
        if (v > 0.0) m = std::max(m, k);
    return m;
}

std::string CriticalityReport::to_string() const {
    std::ostringstream os;
    switch (classification) {
        case Criticality::critical: os << "critical"; break;
        case Criticality::subcritical_admissible: os << "subcritical-admissible"; break;
        case Criticality::non_admissible: os << "non-admissible"; break;
    }
    os << " Z=" << z << " |g(Z)-Z|=" << fixed_point_residual
       << " |g'(Z)-1|=" << tangency_residual;
    return os.str();
}

namespace {

// Evaluates sum_k q_k * k^power * x^(k-shift) * C(2k-1,k-1) over stored
// entries up to k_max, in log space per term. power/shift select g, g', g''.
GValue eval_series(const WeightSeq& q, double x, int deriv) {
    if (x < 0.0) throw std::invalid_argument("eval_g: x must be >= 0");
    GValue out;
    out.value = (deriv == 0) ? 1.0 : 0.0;  // q_0 = 1 constant term
    if (x == 0.0) {
        if (deriv == 1) {
            auto it = q.entries.find(1);
            out.value = (it != q.entries.end()) ? it->second : 0.0;
        }
        return out;
    }
    const double lx = std::log(x);
    double prev_term = 0.0;
    std::int64_t prev_k = 0;
    double last_ratio = 0.0;
    for (const auto& [k, qk] : q.entries) {
        if (k > q.k_max) break;
        if (qk <= 0.0) continue;
        if (deriv >= 1 && k < deriv) continue;
        double lt = std::log(qk) + log_binom_2km1(k) + (k - deriv) * lx;
        if (deriv >= 1) lt += std::log(static_cast<double>(k));
        if (deriv >= 2) lt += std::log(static_cast<double>(k - 1));
        const double term = std::exp(lt);
        out.value += term;
        if (out.value > kOverflowThreshold)
            throw SeriesEvalError("beyond radius of convergence");
        if (prev_term > 0.0 && k > prev_k)
            last_ratio = std::pow(term / prev_term, 1.0 / static_cast<double>(k - prev_k));
        prev_term = term;
        prev_k = k;
    }
    // Geometric bound on everything past the last computed term.
    const bool truncated = q.offspring_tail.has_value() ||
                           (!q.entries.empty() && q.entries.rbegin()->first > q.k_max);
    if (truncated && prev_term > 0.0) {
        if (last_ratio >= 1.0) throw SeriesEvalError("beyond radius of convergence");
        out.truncation_bound = prev_term * last_ratio / (1.0 - last_ratio);
    }
    return out;
}

}  // namespace

GValue eval_g(const WeightSeq& q, double x) { return eval_series(q, x, 0); }
GValue eval_g_prime(const WeightSeq& q, double x) { return eval_series(q, x, 1); }

CriticalityReport classify(const WeightSeq& q, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("classify: tol must be > 0");
    q.validate();
    CriticalityReport rep;

    auto gp = [&](double x) { return eval_series(q, x, 1).value; };
    auto g = [&](double x) { return eval_series(q, x, 0).value; };

    // Locate the tangency candidate x* with g'(x*) = 1; g' is increasing.
    double hi = 1.0;
    try {
        while (gp(hi) < 1.0) {
            hi *= 2.0;
            if (hi > 1e15) { rep.classification = Criticality::non_admissible; return rep; }
        }
    } catch (const SeriesEvalError&) {
        rep.classification = Criticality::non_admissible;
        return rep;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (gp(mid) < 1.0 ? lo : hi) = mid;
    }
    double xstar = 0.5 * (lo + hi);
    // Newton polish on g'(x) - 1 = 0 using g''.
    for (int it = 0; it < 4; ++it) {
        const double d2 = eval_series(q, xstar, 2).value;
        if (d2 <= 0.0) break;
        xstar -= (gp(xstar) - 1.0) / d2;
    }

    const double h_min = g(xstar) - xstar;
    if (std::abs(h_min) <= tol * std::max(1.0, xstar)) {
        rep.classification = Criticality::critical;
        rep.z = xstar;
    } else if (h_min < 0.0) {
        // Two fixed points; admissibility takes the smaller one.
        rep.classification = Criticality::subcritical_admissible;
        double a = 0.0, b = xstar;  // g(0)-0 = 1 > 0
        for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, b); ++it) {
            const double mid = 0.5 * (a + b);
            ((g(mid) - mid) > 0.0 ? a : b) = mid;
        }
        double z = 0.5 * (a + b);
        for (int it = 0; it < 4; ++it) {
            const double d = gp(z) - 1.0;
            if (d == 0.0) break;
            z -= (g(z) - z) / d;
        }
        rep.z = z;
    } else {
        rep.classification = Criticality::non_admissible;
        rep.z = xstar;
    }
    rep.fixed_point_residual = std::abs(g(rep.z) - rep.z);
    rep.tangency_residual = std::abs(gp(rep.z) - 1.0);
    return rep;
}

OffspringLaw::OffspringLaw(std::vector<double> table, std::optional<PowerTail> tail)
    : table_(std::move(table)), tail_(std::move(tail)) {
    if (table_.empty()) throw std::invalid_argument("offspring law: empty table");
    if (tail_ && static_cast<std::int64_t>(table_.size()) != tail_->from)
        throw std::invalid_argument("offspring law: table must cover exactly [0, tail.from)");
    double total = 0.0;
    cdf_.resize(table_.size());
    for (std::size_t k = 0; k < table_.size(); ++k) {
        if (table_[k] < 0.0) throw std::invalid_argument("offspring law: negative mass");
        total += table_[k];
        cdf_[k] = total;
        mean_ += static_cast<double>(k) * table_[k];
    }
    if (tail_) {
        total += tail_->survival(tail_->from);
        // sum_{k>=from} k pmf(k) = from*S(from) + sum_{j>from} S(j)
        mean_ += tail_->from * tail_->survival(tail_->from) +
                 tail_->constant * power_sum_tail(tail_->alpha, tail_->from + 1);
        alpha_ = std::min(2.0, tail_->alpha);
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("offspring law: pmf does not sum to 1");

    // Support lattice metadata.
    std::int64_t first = -1;
    span_ = 0;
    for (std::size_t k = 0; k < table_.size(); ++k) {
        if (table_[k] <= 0.0) continue;
        if (first < 0) first = static_cast<std::int64_t>(k);
        else span_ = std::gcd(span_, static_cast<std::int64_t>(k) - first);
    }
    if (tail_) {
        if (first < 0) first = tail_->from;
        else { span_ = std::gcd(span_, tail_->from - first); span_ = std::gcd(span_, std::int64_t{1}); }
        span_ = 1;  // consecutive integers in the tail
    }
    if (span_ == 0) span_ = 1;
    support_min_ = std::max<std::int64_t>(first, 0);
}

double OffspringLaw::pmf(std::int64_t k) const {
    if (k < 0) return 0.0;
    if (k < static_cast<std::int64_t>(table_.size())) return table_[k];
    return tail_ ? tail_->pmf(k) : 0.0;
}

double OffspringLaw::survival(std::int64_t j) const {
    if (j <= 0) return 1.0;
    if (tail_ && j >= tail_->from) return tail_->survival(j);
    double s = 0.0;
    for (std::int64_t k = j; k < static_cast<std::int64_t>(table_.size()); ++k) s += table_[k];
    if (tail_) s += tail_->survival(tail_->from);
    return s;
}

double OffspringLaw::variance() const {
    if (!has_finite_variance())
        throw std::domain_error("offspring law has infinite variance (alpha < 2 tail)");
    double m2 = 0.0;
    for (std::size_t k = 0; k < table_.size(); ++k)
        m2 += static_cast<double>(k) * static_cast<double>(k) * table_[k];
    return m2 - mean_ * mean_;
}

std::int64_t OffspringLaw::max_table_support() const {
    for (std::int64_t k = static_cast<std::int64_t>(table_.size()) - 1; k >= 0; --k)
        if (table_[k] > 0.0) return k;
    return 0;
}

double OffspringLaw::truncated_variance(std::int64_t x) const {
    double m1 = 0.0, m2 = 0.0;
    const std::int64_t top = tail_ ? x : std::min<std::int64_t>(x, table_.size() - 1);
    for (std::int64_t k = 0; k <= top; ++k) {
        const double p = pmf(k);
        m1 += k * p;
        m2 += static_cast<double>(k) * k * p;
    }
    return m2 - m1 * m1;
}

std::int64_t OffspringLaw::sample(Rng& rng) const {
    const double u = rng.next_double();
    if (tail_) {
        const double tail_mass = tail_->survival(tail_->from);
        if (u >= 1.0 - tail_mass) {
            const double v = std::max(1.0 - u, std::numeric_limits<double>::min());
            const auto k = static_cast<std::int64_t>(
                std::pow(tail_->constant / v, 1.0 / tail_->alpha));
            return std::max(k, tail_->from);
        }
    }
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return static_cast<std::int64_t>(cdf_.size()) - 1;
    return static_cast<std::int64_t>(it - cdf_.begin());
}

OffspringLaw offspring_law(const WeightSeq& q, const CriticalityReport& report, double tol) {
    if (report.classification != Criticality::critical)
        throw std::invalid_argument("offspring_law requires a critical weight sequence");
    const double z = report.z;
    const std::int64_t top = q.offspring_tail ? q.offspring_tail->from - 1
                                              : q.max_support();
    std::vector<double> table(top + 1, 0.0);
    table[0] = 1.0 / z;  // mu(0) = Z^-1, the q_0 = 1 term
    for (const auto& [k, qk] : q.entries) {
        if (k > top || qk <= 0.0) continue;
        table[k] = std::exp((k - 1) * std::log(z) + log_binom_2km1(k) + std::log(qk));
    }
    OffspringLaw mu(std::move(table), q.offspring_tail);
    double total = mu.survival(0);
    if (std::abs(total - 1.0) > tol || std::abs(mu.mean() - 1.0) > tol)
        throw std::runtime_error("inconsistent-weights: offspring law fails normalisation/mean check");
    return mu;
}

WeightSeq weights_from_offspring(const OffspringLaw& mu, double z, std::int64_t k_max) {
    if (z <= 1.0) throw std::invalid_argument("weights_from_offspring: Z must be > 1");
    if (std::abs(mu.mean() - 1.0) > 1e-9)
        throw std::invalid_argument("weights_from_offspring: law must have mean 1");
    WeightSeq q;
    q.k_max = k_max;
    const double lz = std::log(z);
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const double p = mu.pmf(k);
        if (p <= 0.0) continue;
        q.entries[k] = std::exp(std::log(p) + (1 - k) * lz - log_binom_2km1(k));
    }
    q.offspring_tail = mu.tail();
    return q;
}

OffspringLaw make_stable_offspring(double alpha, std::int64_t cutoff) {
    if (alpha <= 1.0 || alpha > 2.0)
        throw std::invalid_argument("make_stable_offspring: alpha must be in (1, 2]");
    if (cutoff < 2) throw std::invalid_argument("make_stable_offspring: cutoff must be >= 2");
    const std::int64_t j0 = cutoff;

    if (alpha == 2.0) {
        // Finite support: exact power profile truncated at the cutoff, with
        // the masses at 0 and 1 tuned so mean = 1.
        std::vector<double> w(j0 + 1, 0.0);
        double mass = 0.0, mean = 0.0;
        for (std::int64_t k = 2; k <= j0; ++k) {
            w[k] = std::pow(static_cast<double>(k), -alpha - 1.0);
            mass += w[k];
            mean += k * w[k];
        }
        const double scale = 0.5 / mean;  // tail contributes mean 1/2
        for (std::int64_t k = 2; k <= j0; ++k) w[k] *= scale;
        w[1] = 0.5;
        w[0] = 1.0 - w[1] - mass * scale;
        if (w[0] < 0.0) throw std::invalid_argument("make_stable_offspring: infeasible mean adjustment");
        return OffspringLaw(std::move(w), std::nullopt);
    }

    // Exact power tail P(xi >= j) = c j^-alpha for j >= j0; masses at 0 and
    // 1 enforce total mass and mean 1. mean = p1 + (j0-1)*c*j0^-alpha + c*H(alpha,j0).
    const double h = power_sum_tail(alpha, j0);
    const double denom = (j0 - 1) * std::pow(static_cast<double>(j0), -alpha) + h;
    const double c = 0.5 / denom;  // tail accounts for mean 1/2
    PowerTail tail{c, alpha, j0};
    std::vector<double> table(j0, 0.0);
    const double tail_mass = tail.survival(j0);
    table[1] = 1.0 - ((j0 - 1) * tail_mass + c * h);
    table[0] = 1.0 - table[1] - tail_mass;
    if (table[0] < 0.0 || table[1] < 0.0)
        throw std::invalid_argument("make_stable_offspring: infeasible mean adjustment");
    return OffspringLaw(std::move(table), tail);
}

Normalizer normalizer(const OffspringLaw& mu) {
    Normalizer b{};
    if (mu.has_finite_variance()) {
        b.rule = Normalizer::Rule::finite_variance;
        b.sigma2 = mu.variance();
        b.alpha = 2.0;
    } else {
        b.rule = Normalizer::Rule::tail_quantile;
        b.tail = *mu.tail();
        b.alpha = mu.alpha();
    }
    return b;
}

double Normalizer::operator()(std::int64_t n) const {
    if (n < 0) throw std::invalid_argument("normalizer: n must be >= 0");
    if (n == 0) return 0.0;
    if (rule == Rule::finite_variance)
        return std::sqrt(static_cast<double>(n) * sigma2 / 2.0);
    // Tail-quantile: smallest integer x with P(xi > x) = S(x+1) <= 1/n.
    const double inv_n = 1.0 / static_cast<double>(n);
    double x = std::ceil(std::pow(tail.constant * n, 1.0 / tail.alpha) - 1.0);
    x = std::max(x, static_cast<double>(tail.from) - 1.0);
    while (tail.survival(static_cast<std::int64_t>(x) + 1) > inv_n) x += 1.0;
    while (x > tail.from &&
           tail.survival(static_cast<std::int64_t>(x)) <= inv_n) x -= 1.0;
    return x;
}

}  // namespace pm
