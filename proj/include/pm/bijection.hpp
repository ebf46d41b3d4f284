#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pm/labels.hpp"
#include "pm/trees.hpp"

namespace pm {

// Pointed bipartite map in half-edge form. Edge e owns half-edges 2e (at
// edge_from) and 2e+1 (at edge_to); vertex 0 is the distinguished star.
struct PointedMap {
    std::int64_t n_vertices = 0;  // includes the star
    std::int64_t star = 0;
    std::vector<std::int64_t> dist;       // graph distance to star, per vertex
    std::vector<std::int64_t> edge_from;  // per edge
    std::vector<std::int64_t> edge_to;
    std::vector<std::vector<std::int64_t>> rotation;  // half-edge cycle per vertex
    std::vector<std::int64_t> rot_next;   // successor within the rotation, per half-edge
    std::int64_t root_half_edge = 0;      // oriented e_+ -> e_-
    std::vector<std::int64_t> vertex_class;  // tree vertex (lex index) -> map vertex

    std::int64_t edge_count() const { return static_cast<std::int64_t>(edge_from.size()); }
    static std::int64_t twin(std::int64_t h) { return h ^ 1; }
    std::int64_t from(std::int64_t h) const {
        return (h & 1) ? edge_to[h >> 1] : edge_from[h >> 1];
    }
    std::int64_t to(std::int64_t h) const { return from(twin(h)); }

    // Face orbits of h -> rot_next[twin(h)].
    std::vector<std::vector<std::int64_t>> faces() const;
};

struct MapReport {
    std::vector<std::pair<std::string, bool>> checks;
    std::string detail;  // first counterexample, when any check fails
    bool all_ok = true;
};

PointedMap tree_to_map(const LabelledTree& lt, bool positive = false);
LabelledTree map_to_tree(const PointedMap& m);
MapReport validate_map(const PointedMap& m);
bool label_distance_identity(const LabelledTree& lt, const PointedMap& m);

// Canonical byte encoding of the rooted map (root-first half-edge traversal);
// equal maps give equal strings.
std::string canonical_encoding(const PointedMap& m);

}  // namespace pm
