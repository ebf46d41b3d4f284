#include "pm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pm {

std::int64_t ProfileMeasure::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

static std::vector<std::vector<std::int64_t>> adjacency(const PointedMap& m) {
    std::vector<std::vector<std::int64_t>> adj(m.n_vertices);
    for (std::int64_t e = 0; e < m.edge_count(); ++e) {
        adj[m.edge_from[e]].push_back(m.edge_to[e]);
        adj[m.edge_to[e]].push_back(m.edge_from[e]);
    }
    return adj;
}

std::vector<std::int64_t> bfs(const PointedMap& m, std::int64_t source) {
    if (source < 0 || source >= m.n_vertices)
        throw std::invalid_argument("invalid-input: bfs source out of range");
    const auto adj = adjacency(m);
    std::vector<std::int64_t> d(m.n_vertices, -1);
    std::deque<std::int64_t> queue{source};
    d[source] = 0;
    while (!queue.empty()) {
        const std::int64_t v = queue.front();
        queue.pop_front();
        for (const std::int64_t w : adj[v])
            if (d[w] < 0) {
                d[w] = d[v] + 1;
                queue.push_back(w);
            }
    }
    return d;
}

RadiusSummary radius_delta_profile(const PointedMap& m) {
    if (m.dist.empty())
        throw std::invalid_argument("invalid-input: map carries no distances");
    RadiusSummary s;
    s.radius = *std::max_element(m.dist.begin(), m.dist.end());
    s.delta = m.dist[m.from(m.root_half_edge)];
    s.profile.counts.assign(s.radius + 1, 0);
    for (const std::int64_t d : m.dist) ++s.profile.counts[d];
    return s;
}

double profile_functional(const ProfileMeasure& rho,
                          const std::function<double(double)>& phi, double b) {
    if (b <= 0) throw std::invalid_argument("invalid-input: normaliser must be positive");
    const double tot = static_cast<double>(rho.total());
    if (tot == 0) return 0;
    const double scale = 1.0 / std::sqrt(b);
    double acc = 0;
    for (std::size_t k = 0; k < rho.counts.size(); ++k)
        acc += phi(scale * static_cast<double>(k)) * static_cast<double>(rho.counts[k]);
    return acc / tot;
}

DlBoundReport dl_bound_check(const LabelledTree& lt, const PointedMap& m,
                             const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
    const auto& l = lt.labels;
    const std::int64_t zeta = lt.tree.edge_count();
    const auto adj = adjacency(m);

    DlBoundReport rep;
    rep.pairs = static_cast<std::int64_t>(pairs.size());
    rep.max_excess = std::numeric_limits<std::int64_t>::min();

    std::vector<std::int64_t> d;
    std::int64_t cached_source = -1;
    for (const auto& [pi, pj] : pairs) {
        if (pi < 0 || pi > zeta || pj < 0 || pj > zeta)
            throw std::invalid_argument("invalid-input: pair index out of range");
        const std::int64_t s = std::min(pi, pj), t = std::max(pi, pj);
        std::int64_t inner = l[s], outer = l[s];
        for (std::int64_t r = s; r <= t; ++r) inner = std::min(inner, l[r]);
        for (std::int64_t r = 0; r <= s; ++r) outer = std::min(outer, l[r]);
        for (std::int64_t r = t; r <= zeta; ++r) outer = std::min(outer, l[r]);
        const std::int64_t dl = l[s] + l[t] - 2 * std::max(inner, outer);

        const std::int64_t src = m.vertex_class[pi];
        if (src != cached_source) {
            d = bfs(m, src);
            cached_source = src;
        }
        const std::int64_t dist = d[m.vertex_class[pj]];
        rep.max_excess = std::max(rep.max_excess, dist - dl);
        if (dist > dl + 2) ++rep.violations;
    }
    if (rep.pairs == 0) rep.max_excess = 0;
    return rep;
}

// linear interpolation of integer-time values at fractional time s
static double interp(const std::vector<std::int64_t>& v, double s) {
    const auto n = static_cast<std::int64_t>(v.size()) - 1;
    const std::int64_t i = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(s)), 0, n);
    if (i == n) return static_cast<double>(v[n]);
    const double f = s - static_cast<double>(i);
    return (1 - f) * static_cast<double>(v[i]) + f * static_cast<double>(v[i + 1]);
}

RescaledProcesses rescaled_processes(const LabelledTree& lt, double b,
                                     std::int64_t grid) {
    if (b <= 0) throw std::invalid_argument("invalid-input: normaliser must be positive");
    if (grid < 1) throw std::invalid_argument("invalid-input: grid must be positive");
    const auto h = height_process(lt.tree).values;
    const auto& l = lt.labels;
    const auto w = lukasiewicz(lt.tree).values;
    const double zeta = static_cast<double>(lt.tree.edge_count());
    if (zeta <= 0) throw std::invalid_argument("invalid-input: tree has no edges");

    RescaledProcesses out;
    out.b = b;
    out.t.resize(grid + 1);
    out.h.resize(grid + 1);
    out.l.resize(grid + 1);
    out.w.resize(grid + 1);
    const double inv_sqrt_b = 1.0 / std::sqrt(b);
    for (std::int64_t j = 0; j <= grid; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(grid);
        out.t[j] = t;
        out.h[j] = (b / zeta) * interp(h, t * zeta);
        out.l[j] = inv_sqrt_b * interp(l, t * zeta);
        // step interpolation over the walk's own time range 0..zeta+1
        const double sw = t * static_cast<double>(w.size() - 1);
        const auto iw = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(sw)),
                                               static_cast<std::int64_t>(w.size()) - 1);
        out.w[j] = static_cast<double>(w[iw]) / b;
    }
    return out;
}

double pointed_bias(const OffspringLaw& mu, const ConditioningSpec& spec,
                    std::int64_t samples, Rng& rng) {
    if (samples < 1) throw std::invalid_argument("invalid-input: samples must be positive");
    std::vector<double> inv_leaves(samples);
    for (std::int64_t i = 0; i < samples; ++i) {
        const PlaneTree t = sample_conditioned(mu, spec, rng);
        const auto leaves = std::count(t.k.begin(), t.k.end(), 0);
        inv_leaves[i] = 1.0 / static_cast<double>(leaves);
    }
    if (std::all_of(inv_leaves.begin(), inv_leaves.end(),
                    [&](double w) { return w == inv_leaves[0]; }))
        return 0;
    const double mean =
        std::accumulate(inv_leaves.begin(), inv_leaves.end(), 0.0) / static_cast<double>(samples);
    double bias = 0;
    for (const double w : inv_leaves) bias += std::abs(w / mean - 1.0);
    return bias / static_cast<double>(samples);
}

double leaf_homogeneity_sup(const PlaneTree& t) {
    const auto idx = leaf_index_map(t);
    const double lambda = static_cast<double>(idx.lam.back());
    const double zeta = static_cast<double>(t.edge_count());
    if (lambda <= 0 || zeta <= 0)
        throw std::invalid_argument("invalid-input: tree has no leaves or no edges");
    double sup = 0;
    for (std::int64_t j = 0; j <= t.edge_count(); ++j) {
        const double cum = j == 0 ? 0.0 : static_cast<double>(idx.lam[j - 1]);
        sup = std::max(sup, std::abs(cum / lambda - static_cast<double>(j) / zeta));
    }
    return sup;
}

// slope of the least-squares line of y against x
static double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

// best-fit s of m ~ c * n^s + d: inner linear least squares in (c, d),
// outer scan plus golden-section refinement over s
static double shifted_power_slope(const std::vector<double>& n,
                                  const std::vector<double>& m) {
    const auto rss = [&](double s) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double cnt = static_cast<double>(n.size());
        std::vector<double> x(n.size());
        for (std::size_t i = 0; i < n.size(); ++i) {
            x[i] = std::pow(n[i], s);
            sx += x[i];
            sy += m[i];
            sxx += x[i] * x[i];
            sxy += x[i] * m[i];
        }
        const double denom = cnt * sxx - sx * sx;
        const double c = (cnt * sxy - sx * sy) / denom;
        const double d = (sy - c * sx) / cnt;
        double acc = 0;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const double r = m[i] - c * x[i] - d;
            acc += r * r;
        }
        return acc;
    };
    double best = 0.05, best_rss = rss(best);
    for (double s = 0.06; s <= 0.8; s += 0.01) {
        const double v = rss(s);
        if (v < best_rss) {
            best_rss = v;
            best = s;
        }
    }
    double lo = best - 0.01, hi = best + 0.01;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
        if (rss(a) < rss(b))
            hi = b;
        else
            lo = a;
    }
    return 0.5 * (lo + hi);
}

SweepResult scaling_sweep(const OffspringLaw& mu, const ConditioningSpec& tmpl,
                          const std::vector<std::int64_t>& ns,
                          std::int64_t replicates, Rng& rng) {
    if (ns.size() < 2) throw std::invalid_argument("invalid-input: need at least two sizes");
    if (replicates < 2) throw std::invalid_argument("invalid-input: need at least two replicates");

    std::vector<SweepCell> cells;
    for (const std::int64_t n : ns) {
        ConditioningSpec spec = tmpl;
        spec.n = n;
        SweepCell cell;
        cell.n = n;
        cell.radii.reserve(replicates);
        cell.edges.reserve(replicates);
        for (std::int64_t r = 0; r < replicates; ++r) {
            const PlaneTree t = sample_conditioned(mu, spec, rng);
            const LabelledTree lt = label_tree(t, rng);
            const auto [lo, hi] = std::minmax_element(lt.labels.begin(), lt.labels.end());
            cell.radii.push_back(static_cast<double>(*hi - *lo + 1));
            cell.edges.push_back(static_cast<double>(t.edge_count()));
        }
        cells.push_back(std::move(cell));
    }
    return fit_sweep(std::move(cells), rng);
}

SweepResult fit_sweep(std::vector<SweepCell> cells, Rng& rng) {
    if (cells.size() < 2) throw std::invalid_argument("invalid-input: need at least two sizes");
    SweepResult res;
    std::vector<double> logn, logr, nd, means;
    std::int64_t min_reps = std::numeric_limits<std::int64_t>::max();
    for (auto& cell : cells) {
        if (cell.radii.size() < 2)
            throw std::invalid_argument("invalid-input: need at least two replicates");
        min_reps = std::min(min_reps, static_cast<std::int64_t>(cell.radii.size()));
        cell.mean_radius = std::accumulate(cell.radii.begin(), cell.radii.end(), 0.0) /
                           static_cast<double>(cell.radii.size());
        logn.push_back(std::log(static_cast<double>(cell.n)));
        logr.push_back(std::log(cell.mean_radius));
        nd.push_back(static_cast<double>(cell.n));
        means.push_back(cell.mean_radius);
    }
    res.low_replicates = min_reps < 100;
    res.slope = ols_slope(logn, logr);
    res.shifted_slope = shifted_power_slope(nd, means);

    // bootstrap over replicates within each cell
    const std::int64_t boot = 1000;
    std::vector<double> slopes(boot), shifted(boot);
    std::vector<double> by(cells.size()), bm(cells.size());
    for (std::int64_t b = 0; b < boot; ++b) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& radii = cells[c].radii;
            double acc = 0;
            for (std::size_t r = 0; r < radii.size(); ++r)
                acc += radii[rng.next_below(radii.size())];
            bm[c] = acc / static_cast<double>(radii.size());
            by[c] = std::log(bm[c]);
        }
        slopes[b] = ols_slope(logn, by);
        shifted[b] = shifted_power_slope(nd, bm);
    }
    const auto spread = [&](const std::vector<double>& v) {
        const double mv = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(boot);
        double var = 0;
        for (const double s : v) var += (s - mv) * (s - mv);
        return std::sqrt(var / static_cast<double>(boot - 1));
    };
    res.slope_se = spread(slopes);
    res.shifted_slope_se = spread(shifted);
    res.cells = std::move(cells);
    return res;
}

}  // namespace pm
