#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pm/bijection.hpp"
#include "pm/labels.hpp"
#include "pm/rng.hpp"
#include "pm/trees.hpp"
#include "pm/weights.hpp"

namespace pm {

// number of vertices at each distance from the star
struct ProfileMeasure {
    std::vector<std::int64_t> counts;
    std::int64_t total() const;
};

struct RadiusSummary {
    std::int64_t radius = 0;  // max distance to the star
    std::int64_t delta = 0;   // distance from the origin of the root half-edge
    ProfileMeasure profile;
};

// exact graph distances from source
std::vector<std::int64_t> bfs(const PointedMap& m, std::int64_t source);

RadiusSummary radius_delta_profile(const PointedMap& m);

// (1/total) * sum_k phi(k / sqrt(b)) * rho(k)
double profile_functional(const ProfileMeasure& rho,
                          const std::function<double(double)>& phi, double b);

// checks d(i,j) <= D_L(i,j) + 2 on the given lexicographic index pairs
struct DlBoundReport {
    std::int64_t pairs = 0;
    std::int64_t violations = 0;
    std::int64_t max_excess = 0;  // max over pairs of d - D_L (expected <= 2)
};
DlBoundReport dl_bound_check(const LabelledTree& lt, const PointedMap& m,
                             const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs);

// height, label and walk processes of the tree rescaled onto a [0,1] grid:
// h(t) = (b/z) H(zt), l(t) = b^{-1/2} L(zt), w(t) = W(zt)/b with z = edge count;
// h and l are linearly interpolated, w is a step function
struct RescaledProcesses {
    std::vector<double> t, h, l, w;
    double b = 0;
};
RescaledProcesses rescaled_processes(const LabelledTree& lt, double b,
                                     std::int64_t grid);

// Monte Carlo estimate of E| (1/lambda) / E[1/lambda] - 1 | over conditioned trees
double pointed_bias(const OffspringLaw& mu, const ConditioningSpec& spec,
                    std::int64_t samples, Rng& rng);

// sup_t | Lambda(zeta * t) / lambda - t | where Lambda(j) counts leaves among
// the first j vertices in lexicographic order
double leaf_homogeneity_sup(const PlaneTree& t);

// radius scaling exponent across a size grid: OLS slope of log mean radius
// against log n, with a replicate-bootstrap standard error
struct SweepCell {
    std::int64_t n = 0;
    std::vector<double> radii;   // one entry per replicate
    std::vector<double> edges;   // zeta(T) per replicate
    double mean_radius = 0;
};
struct SweepResult {
    std::vector<SweepCell> cells;
    double slope = 0;     // plain OLS on log mean radius vs log n
    double slope_se = 0;
    // slope of the offset-corrected fit mean R = c * n^s + d; the additive
    // constant absorbs the dominant finite-size correction of the radius
    double shifted_slope = 0;
    double shifted_slope_se = 0;
    bool low_replicates = false;  // fewer than 100 replicates per cell
};
SweepResult scaling_sweep(const OffspringLaw& mu, const ConditioningSpec& tmpl,
                          const std::vector<std::int64_t>& ns,
                          std::int64_t replicates, Rng& rng);

// regression stage of scaling_sweep on already-sampled cells
SweepResult fit_sweep(std::vector<SweepCell> cells, Rng& rng);

}  // namespace pm
