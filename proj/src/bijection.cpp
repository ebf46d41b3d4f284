#include "pm/bijection.hpp"

#include <algorithm>
#include <functional>
#include <list>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace pm {


std::vector<std::vector<std::int64_t>> PointedMap::faces() const {
    const std::int64_t h_count = 2 * edge_count();
    std::vector<char> seen(h_count, 0);
    std::vector<std::vector<std::int64_t>> out;
    for (std::int64_t h0 = 0; h0 < h_count; ++h0) {
        if (seen[h0]) continue;
        std::vector<std::int64_t> orbit;
        std::int64_t h = h0;
        do {
            seen[h] = 1;
            orbit.push_back(h);
            h = rot_next[twin(h)];
        } while (h != h0);
        out.push_back(std::move(orbit));
    }
    return out;
}

namespace {

void check_labelling(const LabelledTree& lt) {
    const auto& t = lt.tree;
    t.validate();
    if (lt.labels.size() != t.k.size() || lt.labels[0] != 0)
        throw std::invalid_argument("invalid-input: malformed labelling");
    const auto size = t.subtree_sizes();
    for (std::int64_t u = 0; u < t.vertex_count(); ++u) {
        if (t.k[u] == 0) continue;
        std::int64_t c = u + 1, prev = lt.labels[u];
        for (std::int64_t j = 0; j < t.k[u]; ++j) {
            if (lt.labels[c] - prev < -1)
                throw std::invalid_argument("invalid-input: label increment below -1");
            prev = lt.labels[c];
            c += size[c];
        }
        if (prev != lt.labels[u])
            throw std::invalid_argument("invalid-input: last child label differs from parent");
    }
}

}  // namespace

PointedMap tree_to_map(const LabelledTree& lt, bool positive) {
    check_labelling(lt);
    const auto& t = lt.tree;
    const auto& l = lt.labels;
    const std::int64_t nv = t.vertex_count();
    const std::int64_t n_edges = nv - 1;  // map edges = tree edges = N
    if (n_edges < 1) throw std::invalid_argument("invalid-input: need at least one edge");
    const std::int64_t minl = *std::min_element(l.begin(), l.end());
    const std::int64_t maxl = *std::max_element(l.begin(), l.end());

    const auto par = t.parents();
    std::vector<std::int64_t> last_child(nv, -1);
    for (std::int64_t j = 1; j < nv; ++j) last_child[par[j]] = j;

    // class of a vertex: the leaf ending its rightmost descending path
    std::vector<std::int64_t> rep(nv);
    for (std::int64_t j = nv - 1; j >= 0; --j)
        rep[j] = (t.k[j] == 0) ? j : rep[last_child[j]];
    std::vector<std::int64_t> leaf_rank(nv, -1);
    std::int64_t lambda = 0;
    for (std::int64_t j = 0; j < nv; ++j)
        if (t.k[j] == 0) leaf_rank[j] = ++lambda;
    std::vector<std::int64_t> cls(nv);
    for (std::int64_t j = 0; j < nv; ++j) cls[j] = leaf_rank[rep[j]];

    // successor of u_i: first k > i (cyclically doubled) with l(u_k) = l(u_i)-1
    std::vector<std::int64_t> succ(nv, -1);
    {
        std::vector<std::int64_t> nxt(maxl - minl + 2, -1);  // label -> smallest doubled index seen
        for (std::int64_t idx = 2 * nv - 1; idx >= 0; --idx) {
            const std::int64_t pos = idx % nv;
            const std::int64_t lab = l[pos] - minl;
            if (idx < nv && lab > 0 && nxt[lab - 1] >= 0) succ[pos] = nxt[lab - 1] % nv;
            nxt[lab] = idx;
        }
    }

    PointedMap m;
    m.n_vertices = lambda + 1;
    m.edge_from.resize(n_edges);
    m.edge_to.resize(n_edges);
    std::vector<std::int64_t> target(n_edges);  // tree vertex, -1 for star
    std::vector<std::vector<std::int64_t>> in_arcs(nv);
    for (std::int64_t i = 0; i < n_edges; ++i) {
        m.edge_from[i] = cls[i];
        if (l[i] > minl) {
            const std::int64_t j = succ[i];
            if (j < 0) throw std::logic_error("successor not found");
            target[i] = j;
            m.edge_to[i] = cls[j];
            in_arcs[j].push_back(i);
        } else {
            target[i] = -1;
            m.edge_to[i] = m.star;
        }
    }

    // Combined rotation lists: tree half-edges plus arc ends, arcs gathered
    // in the corner between the parent edge and the first child, sorted by
    // decreasing forward lex-distance of the far endpoint (star spokes count
    // as distance 0). Arc i has half-edges 2i (source side) and 2i+1; the
    // tree edge above vertex j has half-edges tree_he(j) (parent side) and
    // tree_he(j)+1 (child side).
    const auto tree_he = [&](std::int64_t j) { return 2 * n_edges + 2 * (j - 1); };
    std::vector<std::list<std::int64_t>> rot(nv);
    std::vector<std::pair<std::int64_t, std::list<std::int64_t>::iterator>> where(
        2 * n_edges + 2 * (nv - 1));  // half-edge -> (tree vertex, position)
    const auto push = [&](std::int64_t u, std::int64_t he) {
        rot[u].push_back(he);
        where[he] = {u, std::prev(rot[u].end())};
    };
    std::vector<std::vector<std::int64_t>> children(nv);
    for (std::int64_t j = 1; j < nv; ++j) children[par[j]].push_back(j);
    for (std::int64_t u = 0; u < nv; ++u) {
        if (u > 0) push(u, tree_he(u) + 1);
        std::vector<std::pair<std::int64_t, std::int64_t>> corner;  // (fwd distance, half-edge)
        if (u < n_edges) {
            const std::int64_t d = target[u] < 0 ? 0 : ((target[u] - u) % nv + nv) % nv;
            corner.emplace_back(d, 2 * u);
        }
        for (const auto i : in_arcs[u]) corner.emplace_back(((i - u) % nv + nv) % nv, 2 * i + 1);
        std::sort(corner.begin(), corner.end(), std::greater<>());
        for (const auto& [d, he] : corner) push(u, he);
        for (const auto c : children[u]) push(u, tree_he(c));
    }

    // delete the tree edges that are not contracted (non-last children)
    for (std::int64_t j = 1; j < nv; ++j) {
        if (j == last_child[par[j]]) continue;
        for (const auto he : {tree_he(j), tree_he(j) + 1}) {
            auto& [u, it] = where[he];
            rot[u].erase(it);
        }
    }
    // contract every internal vertex with its last child, bottom-up: the
    // child's rotation (read cyclically from just after its parent edge)
    // replaces the parent-side half-edge
    for (std::int64_t u = nv - 1; u >= 0; --u) {
        if (t.k[u] == 0) continue;
        const std::int64_t w = last_child[u];
        auto [pu, itp] = where[tree_he(w)];
        auto [pw, itc] = where[tree_he(w) + 1];
        auto& lu = rot[pu];
        auto& lw = rot[pw];
        auto after = std::next(itc);
        lw.erase(itc);
        lu.splice(itp, lw, after, lw.end());
        lu.splice(itp, lw, lw.begin(), lw.end());
        lu.erase(itp);
    }

    // surviving lists live at chain tops (root or non-last children)
    m.rotation.assign(m.n_vertices, {});
    for (std::int64_t u = 0; u < nv; ++u) {
        if (u != 0 && u == last_child[par[u]]) continue;
        auto& out = m.rotation[cls[u]];
        for (const auto he : rot[u]) {
            if (he >= 2 * n_edges) throw std::logic_error("tree half-edge survived contraction");
            out.push_back(he);
        }
    }
    for (std::int64_t i = n_edges - 1; i >= 0; --i)
        if (target[i] < 0) m.rotation[m.star].push_back(2 * i + 1);

    m.dist.assign(m.n_vertices, 0);
    for (std::int64_t j = 0; j < nv; ++j)
        if (t.k[j] == 0) m.dist[cls[j]] = l[j] - minl + 1;
    m.vertex_class = std::move(cls);

    m.rot_next.assign(2 * n_edges, -1);
    for (const auto& cyc : m.rotation)
        for (std::size_t i = 0; i < cyc.size(); ++i)
            m.rot_next[cyc[i]] = cyc[(i + 1) % cyc.size()];
    m.root_half_edge = positive ? 1 : 0;
    return m;
}

LabelledTree map_to_tree(const PointedMap& m) {
    const std::int64_t n_edges = m.edge_count();
    const std::int64_t h_count = 2 * n_edges;
    if (m.rot_next.empty() || m.rotation.empty())
        throw std::invalid_argument("unsupported-representation: rotation system required");
    const std::int64_t rh = m.root_half_edge;
    if (m.dist[m.to(rh)] != m.dist[m.from(rh)] - 1)
        throw std::invalid_argument(
            "map is not negative: reverse the root edge and retry");

    // corner at half-edge h sits at from(h); it is marked when the edge
    // steps down to a smaller label
    std::vector<char> alive(h_count, 0);
    std::vector<std::int64_t> mark_count(m.n_vertices, 0);
    for (std::int64_t h = 0; h < h_count; ++h) {
        if (m.dist[m.to(h)] == m.dist[m.from(h)] - 1) {
            alive[h] = 1;
            ++mark_count[m.from(h)];
        }
    }

    std::vector<std::int64_t> rot_prev(h_count, -1);
    for (std::int64_t h = 0; h < h_count; ++h) rot_prev[m.rot_next[h]] = h;
    // face walk keeps the face on the right of each half-edge; the next
    // remaining mark around a vertex is taken in rotation order
    const auto orbit_next = [&](std::int64_t h) { return rot_prev[PointedMap::twin(h)]; };
    const auto scan_next = [&](std::int64_t h) { return m.rot_next[h]; };

    // each face becomes an internal vertex; its children are read off its
    // marked corners, walking the face from just after the entry mark so the
    // entry mark itself lands in last-child position. A marked corner yields
    // the map vertex as a leaf when it carries the vertex's only remaining
    // mark; otherwise the mark is erased and the child is the face holding
    // the vertex's next remaining mark.
    std::vector<std::int64_t> kseq, labels;
    std::int64_t spent = 0;

    // returns the label assigned to the subtree root it emitted
    const std::function<std::int64_t(std::int64_t)> expand_face =
        [&](std::int64_t entry) -> std::int64_t {
        const std::size_t self = kseq.size();
        kseq.push_back(0);
        labels.push_back(0);
        std::int64_t last_label = 0;
        std::int64_t h = entry;
        for (std::int64_t step = 0;; ++step) {
            if (step > h_count)
                throw std::invalid_argument(
                    "unsupported-representation: face walk does not close");
            h = orbit_next(h);
            const std::int64_t v = m.from(h);
            const bool marked_here = m.dist[m.to(h)] == m.dist[v] - 1;
            if (marked_here) {
                if (!alive[h])
                    throw std::invalid_argument(
                        "unsupported-representation: corner consumed twice");
                ++kseq[self];
                alive[h] = 0;
                --mark_count[v];
                ++spent;
                if (mark_count[v] == 0) {
                    kseq.push_back(0);
                    labels.push_back(m.dist[v]);
                    last_label = m.dist[v];
                } else {
                    std::int64_t c = scan_next(h);
                    while (!alive[c]) c = scan_next(c);
                    last_label = expand_face(c);
                }
            }
            if (h == entry) break;
        }
        labels[self] = last_label;
        return last_label;
    };

    expand_face(rh);
    if (spent != n_edges)
        throw std::invalid_argument("unsupported-representation: stray marked corners");

    LabelledTree lt;
    lt.tree.k = std::move(kseq);
    const std::int64_t root_label = labels[0];
    for (auto& x : labels) x -= root_label;
    lt.labels = std::move(labels);
    lt.tree.validate();
    return lt;
}

namespace {

std::vector<std::int64_t> map_bfs(const PointedMap& m, std::int64_t source) {
    std::vector<std::int64_t> d(m.n_vertices, -1);
    std::queue<std::int64_t> q;
    d[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const auto v = q.front();
        q.pop();
        for (const auto h : m.rotation[v]) {
            const auto w = m.to(h);
            if (d[w] < 0) {
                d[w] = d[v] + 1;
                q.push(w);
            }
        }
    }
    return d;
}

}  // namespace

MapReport validate_map(const PointedMap& m) {
    MapReport rep;
    const auto note = [&](const std::string& name, bool ok, const std::string& why = "") {
        rep.checks.emplace_back(name, ok);
        if (!ok) {
            rep.all_ok = false;
            if (rep.detail.empty()) rep.detail = name + ": " + why;
        }
    };

    // every half-edge appears exactly once across rotations
    std::vector<std::int64_t> occur(2 * m.edge_count(), 0);
    bool rot_ok = true;
    for (std::int64_t v = 0; v < m.n_vertices; ++v)
        for (const auto h : m.rotation[v]) {
            if (h < 0 || h >= 2 * m.edge_count() || m.from(h) != v) rot_ok = false;
            else ++occur[h];
        }
    for (const auto c : occur) rot_ok = rot_ok && c == 1;
    note("rotation-system", rot_ok, "half-edge missing, duplicated, or misplaced");
    if (!rot_ok) return rep;

    const auto d = map_bfs(m, m.star);
    bool connected = true;
    for (const auto x : d) connected = connected && x >= 0;
    note("connected", connected, "unreachable vertex");
    if (!connected) return rep;

    bool dist_ok = true;
    for (std::int64_t v = 0; v < m.n_vertices; ++v) dist_ok = dist_ok && d[v] == m.dist[v];
    note("dist-to-star", dist_ok, "stored distances differ from BFS");

    bool parity_ok = true;
    for (std::int64_t e = 0; e < m.edge_count(); ++e)
        parity_ok = parity_ok && std::abs(m.dist[m.edge_from[e]] - m.dist[m.edge_to[e]]) == 1;
    note("edge-label-step", parity_ok, "an edge does not join labels differing by 1");

    const auto fs = m.faces();
    std::int64_t deg_total = 0;
    bool even_ok = true;
    for (const auto& f : fs) {
        deg_total += static_cast<std::int64_t>(f.size());
        even_ok = even_ok && f.size() % 2 == 0;
    }
    note("even-face-degrees", even_ok, "odd face degree");
    note("handshake", deg_total == 2 * m.edge_count(), "sum of face degrees != 2E");

    const std::int64_t euler =
        m.n_vertices - m.edge_count() + static_cast<std::int64_t>(fs.size());
    std::ostringstream os;
    os << "V-E+F = " << euler;
    note("euler", euler == 2, os.str());

    note("root-negative",
         m.dist[m.to(m.root_half_edge)] == m.dist[m.from(m.root_half_edge)] - 1,
         "root edge not oriented toward the star");
    return rep;
}

bool label_distance_identity(const LabelledTree& lt, const PointedMap& m) {
    const auto d = map_bfs(m, m.star);
    const std::int64_t minl = *std::min_element(lt.labels.begin(), lt.labels.end());
    for (std::int64_t j = 0; j < lt.tree.vertex_count(); ++j) {
        if (lt.tree.k[j] != 0) continue;
        if (d[m.vertex_class[j]] != lt.labels[j] - minl + 1) return false;
    }
    return true;
}

std::string canonical_encoding(const PointedMap& m) {
    // breadth-first over half-edges from the root; renumber vertices by
    // discovery and serialise each rotation from its first discovered entry
    std::vector<std::int64_t> vid(m.n_vertices, -1);
    std::vector<std::int64_t> first_he(m.n_vertices, -1);
    std::int64_t next_id = 0;
    std::queue<std::int64_t> q;  // half-edges
    const auto visit = [&](std::int64_t h) {
        const auto v = m.from(h);
        if (vid[v] < 0) {
            vid[v] = next_id++;
            first_he[v] = h;
            q.push(h);
        }
    };
    visit(m.root_half_edge);
    visit(PointedMap::twin(m.root_half_edge));
    std::ostringstream os;
    while (!q.empty()) {
        const auto h0 = q.front();
        q.pop();
        const auto v = m.from(h0);
        os << "v" << vid[v] << ":" << m.dist[v] << "[";
        std::int64_t h = h0;
        do {
            visit(PointedMap::twin(h));
            os << vid[m.to(h)] << ",";
            h = m.rot_next[h];
        } while (h != h0);
        os << "]";
    }
    os << "#" << m.n_vertices << "," << m.edge_count();
    return os.str();
}

}  // namespace pm
