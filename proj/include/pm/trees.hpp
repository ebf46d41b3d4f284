#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pm/rng.hpp"
#include "pm/weights.hpp"

namespace pm {

// Plane tree as children counts in lexicographic (depth-first) order.
struct PlaneTree {
    std::vector<std::int64_t> k;

    std::int64_t vertex_count() const { return static_cast<std::int64_t>(k.size()); }
    std::int64_t edge_count() const { return vertex_count() - 1; }

    void validate() const;
    std::vector<std::int64_t> parents() const;        // parent index, -1 at root
    std::vector<std::int64_t> subtree_sizes() const;  // vertices in subtree of u_j

    bool operator==(const PlaneTree&) const = default;
};

enum class PathKind { lukasiewicz, height, label };

// Integer path; lukasiewicz paths are step functions with increments >= -1,
// height and label paths are read with linear interpolation.
struct LatticePath {
    std::vector<std::int64_t> values;
    PathKind kind = PathKind::lukasiewicz;
};

enum class CondSet { all, leaves, internal };

struct ConditioningSpec {
    enum class Method { rejection, vervaat };
    CondSet a = CondSet::all;
    std::int64_t n = 2;
    Method method = Method::rejection;
    std::int64_t max_attempts = 200000000;
    std::int64_t size_cap = 100000000;

    void validate() const;
};

struct SampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

LatticePath lukasiewicz(const PlaneTree& t);
PlaneTree tree_from_lukasiewicz(const LatticePath& w);
LatticePath height_process(const PlaneTree& t);

// Unconditioned critical tree; nullopt when the vertex count passes size_cap.
std::optional<PlaneTree> sample_bgw(const OffspringLaw& mu, Rng& rng,
                                    std::int64_t size_cap = 100000000);

// Exactly n vertices with offspring count in the conditioning set.
PlaneTree sample_conditioned(const OffspringLaw& mu, const ConditioningSpec& spec,
                             Rng& rng);

// g[i-1] = lex index of the i-th leaf; lam[j] = leaves among u_0..u_j,
// so lam[g[i-1]] = i and lam.back() = total leaf count.
struct LeafIndexMap {
    std::vector<std::int64_t> g;
    std::vector<std::int64_t> lam;
};

LeafIndexMap leaf_index_map(const PlaneTree& t);

}  // namespace pm
