#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pm/rng.hpp"

namespace pm {

/// log C(2k-1, k-1); exact for small k, lgamma beyond.
double log_binom_2km1(std::int64_t k);

/// C(2k-1, k-1) as a double; throws past the overflow range.
double binom_2km1(std::int64_t k);

struct SeriesEvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact power tail P(X >= j) = constant * j^-alpha for j >= from.
// The paper allows any slowly varying correction; we pin it to a constant
// so normaliser ratios are deterministic.
struct PowerTail {
    double constant = 0.0;
    double alpha = 2.0;
    std::int64_t from = 2;

    double survival(std::int64_t j) const;  // P(X >= j), valid for j >= from
    double pmf(std::int64_t k) const;       // survival(k) - survival(k+1)
};

// Boltzmann weight sequence (q_k)_{k>=1}. Entries are stored explicitly up
// to the truncation bound; an optional tail descriptor records how an
// infinite-support sequence was generated (kept for serialization, the
// series itself is always evaluated on the stored entries).
struct WeightSeq {
    std::map<std::int64_t, double> entries;   // k -> q_k, q_k > 0 only
    std::optional<PowerTail> offspring_tail;  // set when derived from a tail law
    std::int64_t k_max = 4096;                // series truncation bound

    void validate() const;  // q_k >= 0, nontrivial support
    std::int64_t max_support() const;
};

enum class Criticality { critical, subcritical_admissible, non_admissible };

struct CriticalityReport {
    Criticality classification = Criticality::non_admissible;
    double z = 0.0;               // fixed point Z_q when defined
    double fixed_point_residual = 0.0;   // |g(Z) - Z|
    double tangency_residual = 0.0;      // |g'(Z) - 1|
    std::string to_string() const;
};

struct GValue {
    double value = 0.0;
    double truncation_bound = 0.0;  // geometric bound on the dropped tail
};

// Offspring law mu on Z_+: explicit table for k < tail.from, exact power
// tail beyond when present.
class OffspringLaw {
public:
    OffspringLaw(std::vector<double> table, std::optional<PowerTail> tail);

    double pmf(std::int64_t k) const;
    double survival(std::int64_t j) const;  // P(X >= j)
    double mean() const { return mean_; }
    bool has_finite_variance() const { return tail_ ? tail_->alpha > 2.0 : true; }
    double variance() const;  // throws if infinite
    double alpha() const { return alpha_; }
    const std::vector<double>& table() const { return table_; }
    const std::optional<PowerTail>& tail() const { return tail_; }
    std::int64_t max_table_support() const;

    // Truncated variance l(x) = Var(xi * 1{xi <= x}).
    double truncated_variance(std::int64_t x) const;

    std::int64_t sample(Rng& rng) const;

    // gcd of the support differences and smallest support point; used for
    // the lattice feasibility pre-check in the conditioned samplers.
    std::int64_t support_span() const { return span_; }
    std::int64_t support_min() const { return support_min_; }

private:
    std::vector<double> table_;     // pmf on 0..table_.size()-1
    std::optional<PowerTail> tail_; // pmf for k >= tail_->from
    std::vector<double> cdf_;       // cumulative over the table part
    double mean_ = 0.0;
    double alpha_ = 2.0;
    std::int64_t span_ = 1;
    std::int64_t support_min_ = 0;
};

// Normalising sequence B_n.
struct Normalizer {
    enum class Rule { finite_variance, tail_quantile } rule;
    double sigma2 = 0.0;      // finite-variance closed form parameter
    PowerTail tail;           // tail-quantile rule parameter
    double alpha = 2.0;

    double operator()(std::int64_t n) const;
};

GValue eval_g(const WeightSeq& q, double x);
GValue eval_g_prime(const WeightSeq& q, double x);

CriticalityReport classify(const WeightSeq& q, double tol = 1e-10);

OffspringLaw offspring_law(const WeightSeq& q, const CriticalityReport& report,
                           double tol = 1e-9);

WeightSeq weights_from_offspring(const OffspringLaw& mu, double z,
                                 std::int64_t k_max = 4096);

OffspringLaw make_stable_offspring(double alpha, std::int64_t cutoff);

Normalizer normalizer(const OffspringLaw& mu);

}  // namespace pm
