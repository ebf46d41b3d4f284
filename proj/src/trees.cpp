#include "pm/trees.hpp"

#include <numeric>
#include <sstream>

namespace pm {

void PlaneTree::validate() const {
    if (k.empty()) throw std::invalid_argument("empty tree");
    std::int64_t w = 0;
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
        if (k[j] < 0) throw std::invalid_argument("negative children count");
        w += k[j] - 1;
        if (w < 0) throw std::invalid_argument("children counts are not a tree encoding");
    }
    if (k.back() < 0 || w + k.back() - 1 != -1)
        throw std::invalid_argument("children counts are not a tree encoding");
}

std::vector<std::int64_t> PlaneTree::parents() const {
    std::vector<std::int64_t> par(k.size(), -1);
    std::vector<std::pair<std::int64_t, std::int64_t>> stack;  // (vertex, children left)
    for (std::int64_t j = 0; j < vertex_count(); ++j) {
        if (!stack.empty()) {
            par[j] = stack.back().first;
            if (--stack.back().second == 0) stack.pop_back();
        }
        if (k[j] > 0) stack.emplace_back(j, k[j]);
    }
    return par;
}

std::vector<std::int64_t> PlaneTree::subtree_sizes() const {
    const auto par = parents();
    std::vector<std::int64_t> size(k.size(), 1);
    for (std::int64_t j = vertex_count() - 1; j >= 1; --j) size[par[j]] += size[j];
    return size;
}

LatticePath lukasiewicz(const PlaneTree& t) {
    LatticePath w;
    w.kind = PathKind::lukasiewicz;
    w.values.resize(t.k.size() + 1);
    w.values[0] = 0;
    for (std::size_t j = 0; j < t.k.size(); ++j)
        w.values[j + 1] = w.values[j] + t.k[j] - 1;
    return w;
}

PlaneTree tree_from_lukasiewicz(const LatticePath& w) {
    if (w.kind != PathKind::lukasiewicz || w.values.size() < 2 || w.values.front() != 0)
        throw std::invalid_argument("invalid-encoding: not a lukasiewicz path");
    PlaneTree t;
    t.k.resize(w.values.size() - 1);
    for (std::size_t j = 0; j + 1 < w.values.size(); ++j) {
        const std::int64_t inc = w.values[j + 1] - w.values[j];
        if (inc < -1) throw std::invalid_argument("invalid-encoding: increment below -1");
        const bool last = (j + 2 == w.values.size());
        if (!last && w.values[j + 1] < 0)
            throw std::invalid_argument("invalid-encoding: path dips below 0 early");
        t.k[j] = inc + 1;
    }
    if (w.values.back() != -1)
        throw std::invalid_argument("invalid-encoding: path must end at -1");
    return t;
}

LatticePath height_process(const PlaneTree& t) {
    LatticePath h;
    h.kind = PathKind::height;
    h.values.resize(t.k.size());
    std::vector<std::int64_t> stack;  // children still to come, per ancestor
    for (std::int64_t j = 0; j < t.vertex_count(); ++j) {
        h.values[j] = static_cast<std::int64_t>(stack.size());
        if (t.k[j] > 0) {
            stack.push_back(t.k[j]);
        } else {
            while (!stack.empty() && --stack.back() == 0) stack.pop_back();
        }
    }
    return h;
}

std::optional<PlaneTree> sample_bgw(const OffspringLaw& mu, Rng& rng,
                                    std::int64_t size_cap) {
    PlaneTree t;
    std::int64_t pending = 1;
    while (pending > 0) {
        if (t.vertex_count() >= size_cap) return std::nullopt;
        const std::int64_t c = mu.sample(rng);
        t.k.push_back(c);
        pending += c - 1;
    }
    return t;
}

void ConditioningSpec::validate() const {
    if (n < 1) throw std::invalid_argument("conditioning: n must be >= 1");
    if (method == Method::vervaat && a != CondSet::all)
        throw std::invalid_argument("conditioning: vervaat needs A = all");
}

namespace {

bool in_set(std::int64_t c, CondSet a) {
    switch (a) {
        case CondSet::all: return true;
        case CondSet::leaves: return c == 0;
        case CondSet::internal: return c >= 1;
    }
    return false;
}

[[noreturn]] void give_up(const char* what, std::int64_t attempts, std::int64_t accepted) {
    std::ostringstream os;
    os << what << ": max_attempts exhausted, acceptance rate "
       << static_cast<double>(accepted) / static_cast<double>(attempts)
       << " over " << attempts << " attempts";
    throw SampleError(os.str());
}

// Parity pre-check for A = all: n i.i.d. offspring values must be able to
// sum to n - 1 on the support lattice r + d*Z_+.
void check_lattice(const OffspringLaw& mu, std::int64_t n) {
    const std::int64_t d = mu.support_span();
    const std::int64_t r = mu.support_min();
    if (((n - 1 - n * r) % d + d) % d != 0 || n * r > n - 1)
        throw SampleError("lattice-infeasible: no tree with the requested size exists");
}

PlaneTree vervaat_sample(const OffspringLaw& mu, const ConditioningSpec& spec, Rng& rng) {
    const std::int64_t n = spec.n;
    std::vector<std::int64_t> steps(n);
    for (std::int64_t attempt = 1; attempt <= spec.max_attempts; ++attempt) {
        std::int64_t sum = 0;
        for (auto& s : steps) {
            s = mu.sample(rng) - 1;
            sum += s;
        }
        if (sum != -1) continue;
        // Cyclic shift at the first overall minimum turns the bridge into
        // an excursion (discrete Vervaat transform).
        std::int64_t best = 0, w = 0, argmin = n;
        for (std::int64_t j = 0; j < n; ++j) {
            w += steps[j];
            if (w < best) { best = w; argmin = j + 1; }
        }
        PlaneTree t;
        t.k.resize(n);
        for (std::int64_t j = 0; j < n; ++j)
            t.k[j] = steps[(argmin + j) % n] + 1;
        return t;
    }
    give_up("vervaat", spec.max_attempts, 0);
}

PlaneTree rejection_sample(const OffspringLaw& mu, const ConditioningSpec& spec, Rng& rng) {
    const std::int64_t n = spec.n;
    std::int64_t accepted = 0;
    for (std::int64_t attempt = 1; attempt <= spec.max_attempts; ++attempt) {
        PlaneTree t;
        std::int64_t pending = 1, hits = 0;
        bool dead = false;
        while (pending > 0) {
            if (t.vertex_count() >= spec.size_cap) { dead = true; break; }
            const std::int64_t c = mu.sample(rng);
            t.k.push_back(c);
            pending += c - 1;
            if (in_set(c, spec.a) && ++hits > n) { dead = true; break; }
        }
        if (dead || hits != n) continue;
        ++accepted;
        return t;
    }
    give_up("rejection", spec.max_attempts, accepted);
}

// Nonzero offspring support reduced to a single point k0 > 1: leaf and
// internal counts are then deterministic functions of the tree size.
std::optional<std::int64_t> single_support(const OffspringLaw& mu) {
    if (mu.tail()) return std::nullopt;
    std::int64_t k0 = -1;
    const auto& tab = mu.table();
    for (std::size_t k = 1; k < tab.size(); ++k)
        if (tab[k] > 0) {
            if (k0 != -1) return std::nullopt;
            k0 = static_cast<std::int64_t>(k);
        }
    if (k0 <= 1) return std::nullopt;
    return k0;
}

}  // namespace

PlaneTree sample_conditioned(const OffspringLaw& mu, const ConditioningSpec& spec,
                             Rng& rng) {
    spec.validate();
    if (spec.a != CondSet::all) {
        // exact reduction to size-conditioning when the size pins down the
        // leaf/internal counts: v = leaves + internal, v - 1 = k0 * internal
        if (const auto k0 = single_support(mu)) {
            std::int64_t v;
            if (spec.a == CondSet::leaves) {
                if ((spec.n - 1) % (*k0 - 1) != 0)
                    throw SampleError(
                        "lattice-infeasible: no tree with the requested leaf count exists");
                v = spec.n + (spec.n - 1) / (*k0 - 1);
            } else {
                v = *k0 * spec.n + 1;
            }
            ConditioningSpec reduced{CondSet::all, v, ConditioningSpec::Method::vervaat,
                                     spec.max_attempts, spec.size_cap};
            return sample_conditioned(mu, reduced, rng);
        }
    }
    if (spec.a == CondSet::all) check_lattice(mu, spec.n);
    if (spec.method == ConditioningSpec::Method::vervaat)
        return vervaat_sample(mu, spec, rng);
    return rejection_sample(mu, spec, rng);
}

LeafIndexMap leaf_index_map(const PlaneTree& t) {
    LeafIndexMap m;
    m.lam.resize(t.k.size());
    std::int64_t count = 0;
    for (std::int64_t j = 0; j < t.vertex_count(); ++j) {
        if (t.k[j] == 0) {
            ++count;
            m.g.push_back(j);
        }
        m.lam[j] = count;
    }
    return m;
}

}  // namespace pm
