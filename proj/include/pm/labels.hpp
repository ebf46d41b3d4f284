#pragma once

#include <cstdint>
#include <vector>

#include "pm/rng.hpp"
#include "pm/trees.hpp"

namespace pm {

// Nonnegative-jump bridge: partial sums x_1..x_k of increments >= -1 with
// x_k = 0; there are C(2k-1, k-1) of them.
struct Bridge {
    std::vector<std::int64_t> values;
};

// Exactly uniform over B_k^+ by stars and bars: a uniform (k-1)-subset of
// the 2k-1 slots picks a weak composition (t_1..t_k) of k; increments are
// t_i - 1.
Bridge sample_bridge(std::int64_t k, Rng& rng);

// sigma^2_{k,j} = 2j(k-j)/(k+1).
double bridge_marginal_variance(std::int64_t k, std::int64_t j);

struct LabelledTree {
    PlaneTree tree;
    std::vector<std::int64_t> labels;  // per vertex, lex order, root = 0
};

// Independent uniform bridges per internal vertex, drawn in lex order.
LabelledTree label_tree(const PlaneTree& t, Rng& rng);

// L(j) = label of u_j.
LatticePath label_process(const LabelledTree& lt);

}  // namespace pm
