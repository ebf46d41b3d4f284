#include "pm/labels.hpp"

#include <algorithm>
#include <stdexcept>

namespace pm {

Bridge sample_bridge(std::int64_t k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("sample_bridge: k must be >= 1");
    Bridge b;
    b.values.resize(k);
    if (k == 1) {
        b.values[0] = 0;
        return b;
    }
    // Partial Fisher-Yates: first k-1 entries become a uniform subset of
    // {0, ..., 2k-2} (the bar positions).
    const std::int64_t m = 2 * k - 1;
    std::vector<std::int64_t> slots(m);
    for (std::int64_t i = 0; i < m; ++i) slots[i] = i;
    for (std::int64_t i = 0; i < k - 1; ++i)
        std::swap(slots[i], slots[i + static_cast<std::int64_t>(rng.next_below(m - i))]);
    std::sort(slots.begin(), slots.begin() + (k - 1));
    std::int64_t prev = -1, x = 0;
    for (std::int64_t i = 0; i < k - 1; ++i) {
        const std::int64_t t = slots[i] - prev - 1;  // stars before this bar
        prev = slots[i];
        x += t - 1;
        b.values[i] = x;
    }
    b.values[k - 1] = 0;  // forced: increments sum to 0
    return b;
}

double bridge_marginal_variance(std::int64_t k, std::int64_t j) {
    if (j < 1 || j > k) throw std::invalid_argument("bridge_marginal_variance: need 1 <= j <= k");
    return 2.0 * j * (k - j) / static_cast<double>(k + 1);
}

LabelledTree label_tree(const PlaneTree& t, Rng& rng) {
    LabelledTree lt;
    lt.tree = t;
    lt.labels.assign(t.k.size(), 0);
    // (parent label, bridge, next child rank) per open ancestor
    struct Frame {
        std::int64_t label;
        Bridge bridge;
        std::int64_t rank = 0;
    };
    std::vector<Frame> stack;
    for (std::int64_t j = 0; j < t.vertex_count(); ++j) {
        if (!stack.empty()) {
            auto& f = stack.back();
            lt.labels[j] = f.label + f.bridge.values[f.rank++];
        }
        if (t.k[j] > 0) {
            stack.push_back({lt.labels[j], sample_bridge(t.k[j], rng), 0});
        } else {
            while (!stack.empty() &&
                   stack.back().rank == static_cast<std::int64_t>(stack.back().bridge.values.size()))
                stack.pop_back();
        }
    }
    return lt;
}

LatticePath label_process(const LabelledTree& lt) {
    LatticePath p;
    p.kind = PathKind::label;
    p.values = lt.labels;
    return p;
}

}  // namespace pm
