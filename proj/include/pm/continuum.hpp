#pragma once

#include <cstdint>
#include <vector>

#include "pm/rng.hpp"
#include "pm/weights.hpp"

namespace pm {

enum class Provenance { exact_gaussian, walk_proxy };

// Continuum reference triple on a uniform grid over [0,1]. For alpha = 2 the
// excursion and height coincide; for alpha < 2 both come from a rescaled
// conditioned walk and b_m records the normaliser used.
struct ContinuumPath {
    std::vector<double> t, x, h, l;
    double alpha = 2.0;
    Provenance provenance = Provenance::exact_gaussian;
    double b_m = 0;
};

// sqrt(2) times a standard Brownian excursion on m+1 grid points: exact
// Gaussian bridge increments, Vervaat shift at the minimum; x = h.
ContinuumPath brownian_excursion(std::int64_t m, Rng& rng);

// Centred Gaussian label field with covariance (2/3) * min of h over the
// time interval, sampled through a dense Cholesky factorisation with
// escalating diagonal jitter; grids above 4096 steps are refused.
std::vector<double> snake_head(const std::vector<double>& h, Rng& rng,
                               std::int64_t stride = 1);

// Walk with step law sum_k mu(k+1) delta_k conditioned to end at -1
// (resampling), Vervaat shift, rescaled by 1/B_m; h is the height process
// of the encoded tree rescaled by B_m/m.
ContinuumPath stable_proxy_excursion(const OffspringLaw& mu, std::int64_t m,
                                     Rng& rng, std::int64_t max_attempts = 2000000);

// Truncated jump series for the alpha < 2 label field: the K largest jumps
// above jump_threshold (post-rescaling) each carry an independent standard
// Brownian bridge evaluated at the running-infimum argument. tail_bound is
// the identified jump mass left out of the truncated sum.
struct LabelField {
    std::vector<double> l;
    double tail_bound = 0;
    std::int64_t jumps_used = 0;
};
LabelField stable_label_field(const ContinuumPath& x, std::int64_t k, Rng& rng,
                              double jump_threshold = 0.01);

// Two-sample Kolmogorov-Smirnov distance.
double two_sample_ks(std::vector<double> a, std::vector<double> b);

}  // namespace pm
