// Batch front-end: law calibration, conditioned sampling, map statistics,
// scaling sweeps, continuum references, and format exports. All outputs are
// deterministic functions of the master seed; replicate streams derive from
// (seed, n, replicate, stage) so thread count never changes the bytes.
#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pm/bijection.hpp"
#include "pm/continuum.hpp"
#include "pm/labels.hpp"
#include "pm/metrics.hpp"
#include "pm/rng.hpp"
#include "pm/trees.hpp"
#include "pm/weights.hpp"

using json = nlohmann::json;
using namespace pm;

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- law loading ----------------------------------------------------------

struct Law {
    OffspringLaw mu;
    CriticalityReport report;
    std::string source;
};

Law load_law(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError("cannot open law file: " + path);
    json j;
    in >> j;
    const std::string schema = j.at("schema").get<std::string>();
    if (schema == "weights-v1") {
        WeightSeq q;
        for (const auto& [key, val] : j.at("entries").items())
            q.entries[std::stoll(key)] = val.get<double>();
        if (j.contains("k_max")) q.k_max = j.at("k_max").get<std::int64_t>();
        q.validate();
        const auto report = classify(q);
        if (report.classification != Criticality::critical)
            throw CliError("law is not critical, refusing to sample:\n" + report.to_string());
        return Law{offspring_law(q, report), report, path};
    }
    if (schema == "stable-offspring-v1") {
        const double alpha = j.at("alpha").get<double>();
        const auto cutoff = j.at("cutoff").get<std::int64_t>();
        auto mu = make_stable_offspring(alpha, cutoff);
        CriticalityReport report;
        report.classification = Criticality::critical;
        report.z = 1.0 / mu.pmf(0);  // mu(0) = 1/Z_q
        report.fixed_point_residual = 0;
        report.tangency_residual = std::abs(mu.mean() - 1.0);
        return Law{std::move(mu), report, path};
    }
    throw CliError("unknown law schema: " + schema);
}

// ---- conditioning (section 2.4 correspondence) ----------------------------

// map conditioned on S = n corresponds to the tree conditioned as follows:
// n edges <-> n+1 vertices (A = all), n vertices <-> n-1 leaves (A = leaves),
// n faces <-> n internal vertices (A = internal)
struct CondMap {
    CondSet a;
    std::int64_t tree_n;
};

CondMap map_conditioning(const std::string& cond, std::int64_t n) {
    if (cond == "edges") return {CondSet::all, n + 1};
    if (cond == "vertices") return {CondSet::leaves, n - 1};
    if (cond == "faces") return {CondSet::internal, n};
    throw CliError("unknown conditioning: " + cond + " (expected edges|vertices|faces)");
}

ConditioningSpec make_spec(const CondMap& cm) {
    ConditioningSpec spec;
    spec.a = cm.a;
    spec.n = cm.tree_n;
    spec.method = cm.a == CondSet::all ? ConditioningSpec::Method::vervaat
                                       : ConditioningSpec::Method::rejection;
    return spec;
}

void assert_map_conditioning(const PointedMap& m, const std::string& cond, std::int64_t n) {
    bool ok = true;
    if (cond == "edges") ok = m.edge_count() == n;
    if (cond == "vertices") ok = m.n_vertices == n;
    if (cond == "faces") ok = static_cast<std::int64_t>(m.faces().size()) == n;
    if (!ok) throw CliError("internal error: sampled map violates the conditioning");
}

// ---- replicate scheduling --------------------------------------------------

// runs make(i) for i in [0, count) on a bounded pool and returns results in
// index order, so output bytes do not depend on the thread count
std::vector<std::string> indexed_rows(std::int64_t count, std::int64_t threads,
                                      const std::function<std::string(std::int64_t)>& make) {
    std::vector<std::string> rows(count);
    if (threads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) rows[i] = make(i);
        return rows;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::int64_t w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const std::int64_t i = next.fetch_add(1);
                    if (i >= count) return;
                    rows[i] = make(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
                next.store(count);
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError("cannot open output file: " + path);
    return out;
}

// ---- serialisation ---------------------------------------------------------

json tree_row(const LabelledTree& lt) {
    return json{{"k", lt.tree.k}, {"labels", lt.labels}};
}

json map_row(const PointedMap& m) {
    json edges = json::array();
    for (std::int64_t e = 0; e < m.edge_count(); ++e)
        edges.push_back({m.edge_from[e], m.edge_to[e]});
    return json{{"vertices", m.n_vertices},
                {"edges", std::move(edges)},
                {"rotation", m.rotation},
                {"root_half_edge", m.root_half_edge},
                {"dist", m.dist},
                {"vertex_class", m.vertex_class}};
}

PointedMap map_from_row(const json& j) {
    PointedMap m;
    m.n_vertices = j.at("vertices").get<std::int64_t>();
    for (const auto& e : j.at("edges")) {
        m.edge_from.push_back(e.at(0).get<std::int64_t>());
        m.edge_to.push_back(e.at(1).get<std::int64_t>());
    }
    m.rotation = j.at("rotation").get<std::vector<std::vector<std::int64_t>>>();
    m.root_half_edge = j.at("root_half_edge").get<std::int64_t>();
    m.dist = j.at("dist").get<std::vector<std::int64_t>>();
    m.vertex_class = j.at("vertex_class").get<std::vector<std::int64_t>>();
    m.rot_next.assign(2 * m.edge_count(), -1);
    for (const auto& cycle : m.rotation)
        for (std::size_t i = 0; i < cycle.size(); ++i)
            m.rot_next[cycle[i]] = cycle[(i + 1) % cycle.size()];
    return m;
}

// ---- subcommands -----------------------------------------------------------

struct Common {
    std::string law_path;
    std::string cond = "edges";
    std::int64_t n = 0;
    std::int64_t reps = 1;
    std::uint64_t seed = 0;
    std::int64_t threads = 1;
    std::string out;
};

int cmd_weights_check(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError("cannot open law file: " + path);
    json j;
    in >> j;
    if (j.at("schema").get<std::string>() != "weights-v1")
        throw CliError("weights check expects a weights-v1 file");
    WeightSeq q;
    for (const auto& [key, val] : j.at("entries").items())
        q.entries[std::stoll(key)] = val.get<double>();
    if (j.contains("k_max")) q.k_max = j.at("k_max").get<std::int64_t>();
    q.validate();
    const auto report = classify(q);
    std::cout << report.to_string() << "\n";
    return report.classification == Criticality::critical ? 0 : 1;
}

void cmd_sample_tree(const Common& c) {
    const Law law = load_law(c.law_path);
    const ConditioningSpec spec = make_spec(map_conditioning(c.cond, c.n));
    auto out = open_out(c.out);
    out << json{{"schema", "labelled-trees-v1"}}.dump() << "\n";
    const auto rows = indexed_rows(c.reps, c.threads, [&](std::int64_t rep) {
        auto rng = Rng::derive({c.seed, static_cast<std::uint64_t>(c.n),
                                static_cast<std::uint64_t>(rep), 1});
        const LabelledTree lt = label_tree(sample_conditioned(law.mu, spec, rng), rng);
        json j = tree_row(lt);
        j["seed"] = c.seed;
        j["n"] = c.n;
        j["cond"] = c.cond;
        j["rep"] = rep;
        return j.dump();
    });
    for (const auto& r : rows) out << r << "\n";
}

void cmd_sample_map(const Common& c) {
    const Law law = load_law(c.law_path);
    const ConditioningSpec spec = make_spec(map_conditioning(c.cond, c.n));
    auto out = open_out(c.out);
    out << json{{"schema", "maps-v1"}}.dump() << "\n";
    const auto rows = indexed_rows(c.reps, c.threads, [&](std::int64_t rep) {
        auto rng = Rng::derive({c.seed, static_cast<std::uint64_t>(c.n),
                                static_cast<std::uint64_t>(rep), 2});
        const LabelledTree lt = label_tree(sample_conditioned(law.mu, spec, rng), rng);
        const PointedMap m = tree_to_map(lt);
        assert_map_conditioning(m, c.cond, c.n);
        json j = map_row(m);
        j["seed"] = c.seed;
        j["n"] = c.n;
        j["cond"] = c.cond;
        j["rep"] = rep;
        return j.dump();
    });
    for (const auto& r : rows) out << r << "\n";
}

void cmd_stats(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw CliError("cannot open input file: " + in_path);
    std::string line;
    if (!std::getline(in, line)) throw CliError("empty input file");
    if (json::parse(line).at("schema").get<std::string>() != "maps-v1")
        throw CliError("stats expects a maps-v1 file");
    auto out = open_out(out_path);
    out << "seed,n,cond,rep,vertices,zeta,radius,delta,lambda\n";
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        const PointedMap m = map_from_row(j);
        const auto s = radius_delta_profile(m);
        out << j.at("seed").get<std::uint64_t>() << "," << j.at("n").get<std::int64_t>()
            << "," << j.at("cond").get<std::string>() << "," << j.at("rep").get<std::int64_t>()
            << "," << m.n_vertices << "," << m.edge_count() << "," << s.radius << ","
            << s.delta << "," << m.n_vertices - 1 << "\n";
    }
}

void cmd_scaling_sweep(const Common& c, const std::vector<std::int64_t>& ns) {
    const Law law = load_law(c.law_path);
    struct Row {
        std::int64_t n, rep, zeta, radius, delta, lambda;
        double runtime_s;
    };
    std::vector<SweepCell> cells;
    std::vector<Row> rows;
    for (const std::int64_t n : ns) {
        const ConditioningSpec spec = make_spec(map_conditioning(c.cond, n));
        SweepCell cell;
        cell.n = n;
        for (std::int64_t rep = 0; rep < c.reps; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            auto rng = Rng::derive({c.seed, static_cast<std::uint64_t>(n),
                                    static_cast<std::uint64_t>(rep), 3});
            const PlaneTree t = sample_conditioned(law.mu, spec, rng);
            const LabelledTree lt = label_tree(t, rng);
            const auto [lo, hi] = std::minmax_element(lt.labels.begin(), lt.labels.end());
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
            const auto lambda = std::count(t.k.begin(), t.k.end(), std::int64_t{0});
            rows.push_back({n, rep, t.edge_count(), *hi - *lo + 1, -*lo + 1, lambda, dt.count()});
            cell.radii.push_back(static_cast<double>(*hi - *lo + 1));
            cell.edges.push_back(static_cast<double>(t.edge_count()));
        }
        cells.push_back(std::move(cell));
    }
    auto fit_rng = Rng::derive({c.seed, 0xb007});
    const SweepResult fit = fit_sweep(std::move(cells), fit_rng);

    auto out = open_out(c.out);
    out << "n,rep,zeta,radius,delta,lambda,runtime_s,slope,slope_se,shifted_slope,"
           "shifted_slope_se\n";
    for (const auto& r : rows)
        out << r.n << "," << r.rep << "," << r.zeta << "," << r.radius << "," << r.delta
            << "," << r.lambda << "," << fmt_double(r.runtime_s) << ","
            << fmt_double(fit.slope) << "," << fmt_double(fit.slope_se) << ","
            << fmt_double(fit.shifted_slope) << "," << fmt_double(fit.shifted_slope_se)
            << "\n";
    std::cout << "slope " << fmt_double(fit.slope) << " se " << fmt_double(fit.slope_se)
              << " shifted_slope " << fmt_double(fit.shifted_slope) << " se "
              << fmt_double(fit.shifted_slope_se)
              << (fit.low_replicates ? " (low replicates: widened error bars)" : "") << "\n";
}

void cmd_continuum_ref(double alpha, std::int64_t grid, std::int64_t jumps,
                       std::uint64_t seed, const std::string& out_path) {
    auto rng = Rng::derive({seed, 4});
    ContinuumPath p;
    std::vector<double> l;
    if (alpha == 2.0) {
        p = brownian_excursion(grid, rng);
        l = snake_head(p.h, rng);
    } else {
        const auto mu = make_stable_offspring(alpha, 2);
        p = stable_proxy_excursion(mu, grid, rng);
        const auto field = stable_label_field(p, jumps, rng);
        l = field.l;
        std::cout << "jumps_used " << field.jumps_used << " tail_bound "
                  << fmt_double(field.tail_bound) << "\n";
    }
    auto out = open_out(out_path);
    out << "t,x,h,l\n";
    for (std::size_t j = 0; j < p.t.size(); ++j)
        out << fmt_double(p.t[j]) << "," << fmt_double(p.x[j]) << "," << fmt_double(p.h[j])
            << "," << fmt_double(l[j]) << "\n";
}

void cmd_export(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw CliError("cannot open input file: " + in_path);
    std::string line;
    if (!std::getline(in, line)) throw CliError("empty input file");
    const std::string schema = json::parse(line).at("schema").get<std::string>();
    auto out = open_out(out_path);
    std::int64_t row = 0;
    if (schema == "labelled-trees-v1") {
        out << "row,vertex,k,label\n";
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto k = j.at("k").get<std::vector<std::int64_t>>();
            const auto labels = j.at("labels").get<std::vector<std::int64_t>>();
            for (std::size_t v = 0; v < k.size(); ++v)
                out << row << "," << v << "," << k[v] << "," << labels[v] << "\n";
            ++row;
        }
        return;
    }
    if (schema == "maps-v1") {
        out << "row,edge,from,to,dist_from,dist_to\n";
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto dist = j.at("dist").get<std::vector<std::int64_t>>();
            std::int64_t e = 0;
            for (const auto& edge : j.at("edges")) {
                const auto u = edge.at(0).get<std::int64_t>();
                const auto v = edge.at(1).get<std::int64_t>();
                out << row << "," << e++ << "," << u << "," << v << "," << dist[u] << ","
                    << dist[v] << "\n";
            }
            ++row;
        }
        return;
    }
    throw CliError("unknown input schema: " + schema);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sampler and verification toolkit for critical Boltzmann bipartite maps"};
    app.require_subcommand(1);
    app.fallthrough();  // global --seed/--threads/--out work after a subcommand

    Common c;
    app.add_option("--seed", c.seed, "master seed")->capture_default_str();
    app.add_option("--threads", c.threads, "worker threads for replicate loops")
        ->capture_default_str();
    app.add_option("--out", c.out, "output path");

    auto* weights = app.add_subcommand("weights", "weight-sequence utilities");
    auto* check = weights->add_subcommand("check", "classify a weight sequence");
    std::string check_path;
    check->add_option("file", check_path, "weights-v1 JSON file")->required();

    auto* sample_tree = app.add_subcommand("sample-tree", "sample conditioned labelled trees");
    auto* sample_map = app.add_subcommand("sample-map", "sample pointed Boltzmann maps");
    for (auto* sub : {sample_tree, sample_map}) {
        sub->add_option("--law", c.law_path, "law JSON file")->required();
        sub->add_option("--cond", c.cond, "conditioning: edges|vertices|faces")
            ->capture_default_str();
        sub->add_option("--n", c.n, "conditioned size of the map")->required();
        sub->add_option("--reps", c.reps, "replicates")->capture_default_str();
    }

    auto* stats = app.add_subcommand("stats", "radius/profile statistics of sampled maps");
    std::string stats_in;
    stats->add_option("--in", stats_in, "maps-v1 JSONL file")->required();

    auto* sweep = app.add_subcommand("scaling-sweep", "radius scaling exponent across sizes");
    std::vector<std::int64_t> sweep_ns;
    sweep->add_option("--law", c.law_path, "law JSON file")->required();
    sweep->add_option("--cond", c.cond, "conditioning: edges|vertices|faces")
        ->capture_default_str();
    sweep->add_option("--ns", sweep_ns, "comma-separated map sizes")
        ->required()
        ->delimiter(',');
    sweep->add_option("--reps", c.reps, "replicates per size")->capture_default_str();

    auto* cont = app.add_subcommand("continuum-ref", "continuum reference path");
    double cont_alpha = 2.0;
    std::int64_t cont_grid = 1024, cont_jumps = 50;
    cont->add_option("--alpha", cont_alpha, "stability index")->capture_default_str();
    cont->add_option("--grid", cont_grid, "grid steps")->capture_default_str();
    cont->add_option("--jumps", cont_jumps, "jump cutoff for the label series")
        ->capture_default_str();

    auto* exp = app.add_subcommand("export", "convert JSONL samples to CSV");
    std::string exp_in;
    exp->add_option("--in", exp_in, "JSONL file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_weights_check(check_path);
        if (weights->parsed()) throw CliError("weights requires a subcommand (check)");
        if (c.out.empty() && !stats->parsed() && !exp->parsed())
            if (sample_tree->parsed() || sample_map->parsed() || sweep->parsed() ||
                cont->parsed())
                throw CliError("--out is required for this subcommand");
        if (sample_tree->parsed()) cmd_sample_tree(c);
        if (sample_map->parsed()) cmd_sample_map(c);
        if (stats->parsed()) {
            if (c.out.empty()) throw CliError("--out is required for stats");
            cmd_stats(stats_in, c.out);
        }
        if (sweep->parsed()) cmd_scaling_sweep(c, sweep_ns);
        if (cont->parsed()) cmd_continuum_ref(cont_alpha, cont_grid, cont_jumps, c.seed, c.out);
        if (exp->parsed()) {
            if (c.out.empty()) throw CliError("--out is required for export");
            cmd_export(exp_in, c.out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
