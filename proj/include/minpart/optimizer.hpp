#pragma once

#include "minpart/error.hpp"
#include "minpart/fem.hpp"
#include "minpart/mesh.hpp"
#include "minpart/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace minpart {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// p-mean of the part energies; the maximum for p = infinity. Any infinite
/// energy (empty part) makes the result infinite.
inline double objective(std::span<const double> values, double p) {
    if (values.empty()) throw InvalidArgument("objective: no part values");
    if (!(p >= 1.0)) throw InvalidArgument("objective: exponent must be >= 1");
    double mx = 0.0;
    for (double v : values) {
        if (!(v > 0.0)) throw InvalidArgument("objective: part values must be positive");
        if (std::isinf(v)) return kInfinity;
        mx = std::max(mx, v);
    }
    if (std::isinf(p)) return mx;
    // Scale by the max to keep large exponents finite.
    double s = 0.0;
    for (double v : values) s += std::pow(v / mx, p);
    return mx * std::pow(s / static_cast<double>(values.size()), 1.0 / p);
}

inline double objective(std::initializer_list<double> values, double p) {
    return objective(std::span<const double>(values.begin(), values.size()), p);
}

struct Partition {
    Labeling labeling;
    /// Vertex labels; interface vertices are kUnassigned so no mesh edge
    /// joins two different parts.
    std::vector<int> vertex_labels;
    std::vector<ScalarField> part_fields;
    std::vector<double> part_values;
    /// Penalized extensions of the part fields across interfaces, used for
    /// reassignment and to draw interfaces. Empty when not computed.
    std::vector<ScalarField> extended_fields;
    Potential potential;
    double p = kInfinity;
    double objective = kInfinity;

    int iterations = 0;
    bool converged = false;
    /// Objective after every accepted step, all exponents concatenated.
    std::vector<double> history;
    std::vector<std::string> log;

    int k() const { return labeling.k; }
};

enum class SeedKind { Voronoi, Sectors, Strips, File };

struct SeedSpec {
    SeedKind kind = SeedKind::Voronoi;
    /// Number of random draws for Voronoi seeding; the best final
    /// objective wins.
    int draws = 3;
    std::uint64_t rng_seed = 1;
    /// Vertex labels for SeedKind::File (kUnassigned allowed).
    std::vector<int> labels;
};

struct OptimizerOptions {
    std::vector<double> p_schedule{1, 2, 4, 8, 16, 32, kInfinity};
    SeedSpec seed;
    int iter_cap = 200;
    double stall_tol = 1e-9;
    double zero_tol = 1e-8;
    /// Exponent used for the reassignment weights once p = infinity.
    double p_infinity_weight = 64.0;
    /// Penalty c = penalty_scale / h^2 for the extended fields.
    double penalty_scale = 1.0;
    double solver_tol = 1e-8;
    int threads = 1;
};

namespace detail {

inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += threads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Triangle labels from vertex labels: a triangle belongs to the part of any
// of its labeled vertices (separation guarantees at most one).
inline Labeling triangle_labeling(const MeshPtr& mesh, const std::vector<int>& vlabels, int k) {
    Labeling out;
    out.mesh = mesh;
    out.k = k;
    out.labels.assign(mesh->triangle_count(), kUnassigned);
    for (int t = 0; t < mesh->triangle_count(); ++t)
        for (int v : mesh->triangles()[t])
            if (vlabels[v] != kUnassigned) out.labels[t] = vlabels[v];
    return out;
}

// Unassigns one endpoint of every edge joining two different parts: the one
// whose label is less certain (smaller margin), lower part index on ties.
inline void separate(const Mesh& mesh, std::vector<int>& vlabels, const std::vector<double>& margin) {
    for (const auto& e : mesh.edges()) {
        const int a = e[0], b = e[1];
        if (vlabels[a] == kUnassigned || vlabels[b] == kUnassigned || vlabels[a] == vlabels[b]) continue;
        int drop;
        if (margin[a] != margin[b]) drop = margin[a] < margin[b] ? a : b;
        else drop = vlabels[a] > vlabels[b] ? a : b;
        vlabels[drop] = kUnassigned;
    }
}

// Vertex components of one label (mesh-edge connectivity).
inline std::vector<std::vector<int>> label_components(const Mesh& mesh, const std::vector<int>& vlabels, int label) {
    std::vector<char> seen(mesh.vertex_count(), 0);
    std::vector<std::vector<int>> comps;
    for (int v0 = 0; v0 < mesh.vertex_count(); ++v0) {
        if (seen[v0] || vlabels[v0] != label) continue;
        comps.emplace_back();
        std::vector<int> stack{v0};
        seen[v0] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            comps.back().push_back(v);
            for (int w : mesh.neighbors(v))
                if (!seen[w] && vlabels[w] == label) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
    }
    return comps;
}

inline double component_weight(const Vector& lumped, const std::vector<int>& comp) {
    double s = 0.0;
    for (int v : comp) s += lumped[v];
    return s;
}

class Engine {
public:
    Engine(MeshPtr mesh, int k, const Potential& potential, const OptimizerOptions& opt)
        : mesh_(std::move(mesh)), k_(k), opt_(opt) {
        potential_ = potential;
        forms_ = assemble(*mesh_, potential);
        min_potential_ = potential.minimum(*mesh_);
        lumped_ = Vector::Zero(mesh_->vertex_count());
        for (int t = 0; t < mesh_->triangle_count(); ++t)
            for (int v : mesh_->triangles()[t]) lumped_[v] += mesh_->triangle_area(t) / 3.0;
        const double h = mesh_->max_edge_length();
        penalty_ = opt_.penalty_scale / (h * h);
        warm_.assign(k_, Vector());
        warm_ext_.assign(k_, Vector());
    }

    const MeshPtr& mesh() const { return mesh_; }
    const Forms& forms() const { return forms_; }

    bool assignable(int v) const { return !mesh_->is_dirichlet_vertex(v); }

    // Ground states of every part; fills fields and energies.
    void evaluate(Partition& part, double p) {
        part.p = p;
        part.potential = potential_;
        part.part_fields.assign(k_, ScalarField(mesh_, Vector::Zero(mesh_->vertex_count())));
        part.part_values.assign(k_, kInfinity);
        EigenOptions eo;
        eo.tol = opt_.solver_tol;
        eo.padding = 2;
        parallel_for(k_, opt_.threads, [&](int i) {
            std::vector<char> support(mesh_->vertex_count());
            for (int v = 0; v < mesh_->vertex_count(); ++v) support[v] = part.vertex_labels[v] == i;
            EigenOptions local = eo;
            if (warm_[i].size()) local.warm_start = {warm_[i]};
            auto gs = ground_state_on_support(mesh_, forms_, min_potential_, support, local);
            if (gs) {
                Vector u = gs->field.values;
                if (u.sum() < 0) u = -u;
                part.part_fields[i] = ScalarField(mesh_, u);
                part.part_values[i] = gs->value;
            }
        });
        for (int i = 0; i < k_; ++i)
            if (std::isfinite(part.part_values[i])) warm_[i] = part.part_fields[i].values;
        part.labeling = triangle_labeling(mesh_, part.vertex_labels, k_);
        part.objective = objective(part.part_values, p);
    }

    // Triangles with no labeled vertex (gaps at junctions) join the adjacent
    // part whose extended field is largest on them.
    void close_gaps(Partition& part) const {
        auto& lab = part.labeling.labels;
        for (bool changed = true; changed;) {
            changed = false;
            for (int t = 0; t < mesh_->triangle_count(); ++t) {
                if (lab[t] != kUnassigned) continue;
                int best = kUnassigned;
                double best_val = 0.0;
                for (int e : mesh_->triangle_edges(t)) {
                    const auto& et = mesh_->edge_triangles(e);
                    const int nb = et[0] == t ? et[1] : et[0];
                    if (nb < 0 || lab[nb] == kUnassigned) continue;
                    double val = 0.0;
                    for (int v : mesh_->triangles()[t]) val += part.extended_fields[lab[nb]].values[v];
                    if (best == kUnassigned || val > best_val) {
                        best = lab[nb];
                        best_val = val;
                    }
                }
                if (best != kUnassigned && best_val > 0.0) {
                    lab[t] = best;
                    changed = true;
                }
            }
        }
    }

    // Ground state of K + c*D_out where D_out is the lumped mass outside the
    // part: the part field continued a few mesh sizes across its boundary.
    void extend(Partition& part) {
        part.extended_fields.assign(k_, ScalarField(mesh_, Vector::Zero(mesh_->vertex_count())));
        EigenOptions eo;
        eo.tol = opt_.solver_tol;
        eo.padding = 2;
        parallel_for(k_, opt_.threads, [&](int i) {
            Forms f{forms_.stiffness, forms_.mass};
            std::vector<Eigen::Triplet<double>> diag;
            for (int v = 0; v < mesh_->vertex_count(); ++v)
                if (part.vertex_labels[v] != i) diag.emplace_back(v, v, penalty_ * lumped_[v]);
            SparseMatrix d(mesh_->vertex_count(), mesh_->vertex_count());
            d.setFromTriplets(diag.begin(), diag.end());
            f.stiffness += d;
            std::vector<char> free(mesh_->vertex_count());
            for (int v = 0; v < mesh_->vertex_count(); ++v) free[v] = assignable(v);
            EigenOptions local = eo;
            if (warm_ext_[i].size()) local.warm_start = {warm_ext_[i]};
            else if (part.part_fields[i].values.size()) local.warm_start = {part.part_fields[i].values};
            auto spec = solve_constrained(mesh_, f, min_potential_, free, 1, local);
            Vector e = spec.pairs.front().field.values;
            if (e.dot(part.part_fields[i].values) < 0 || (part.part_fields[i].values.squaredNorm() == 0 && e.sum() < 0))
                e = -e;
            part.extended_fields[i] = ScalarField(mesh_, e);
        });
        for (int i = 0; i < k_; ++i) warm_ext_[i] = part.extended_fields[i].values;
    }

    struct Proposal {
        std::vector<int> labels;
        std::vector<double> margin;
    };

    // Weighted argmax of the extended fields, before any cleanup.
    Proposal propose(const Partition& part, double p) const {
        const int nv = mesh_->vertex_count();
        const double q = std::isinf(p) ? opt_.p_infinity_weight : p;
        double lmax = 0.0;
        for (double l : part.part_values)
            if (std::isfinite(l)) lmax = std::max(lmax, l);
        std::vector<double> w(k_, 0.0);
        for (int i = 0; i < k_; ++i)
            w[i] = std::isfinite(part.part_values[i]) ? std::pow(part.part_values[i] / lmax, 0.5 * (q - 1.0)) : 1.0;
        double fmax = 0.0;
        for (int i = 0; i < k_; ++i) fmax = std::max(fmax, w[i] * part.extended_fields[i].values.maxCoeff());
        const double floor = opt_.zero_tol * fmax;
        std::vector<int> labels(nv, kUnassigned);
        std::vector<double> margin(nv, 0.0);
        for (int v = 0; v < nv; ++v) {
            if (!assignable(v)) continue;
            double best = -kInfinity, second = -kInfinity;
            int arg = kUnassigned;
            for (int i = 0; i < k_; ++i) {
                const double val = w[i] * part.extended_fields[i].values[v];
                if (val > best) {
                    second = best;
                    best = val;
                    arg = i;
                } else if (val > second) {
                    second = val;
                }
            }
            if (best <= floor) continue;
            labels[v] = arg;
            margin[v] = best - second;
        }
        return {std::move(labels), std::move(margin)};
    }

    // Separation, connectivity and empty-part repair.
    std::vector<int> finalize(std::vector<int> labels, const std::vector<double>& margin, const Partition& part) {
        separate(*mesh_, labels, margin);
        keep_largest_components(labels);
        repair_empty(labels, part);
        return labels;
    }

    void keep_largest_components(std::vector<int>& labels) const {
        for (int i = 0; i < k_; ++i) {
            auto comps = label_components(*mesh_, labels, i);
            if (comps.size() < 2) continue;
            size_t best = 0;
            for (size_t c = 1; c < comps.size(); ++c)
                if (component_weight(lumped_, comps[c]) > component_weight(lumped_, comps[best])) best = c;
            for (size_t c = 0; c < comps.size(); ++c)
                if (c != best)
                    for (int v : comps[c]) labels[v] = kUnassigned;
        }
    }

    // An emptied part restarts from the largest connected unassigned region
    // (minus a separating layer); failing that, from the vertex deepest
    // inside the largest part.
    void repair_empty(std::vector<int>& labels, const Partition& part) {
        for (int i = 0; i < k_; ++i) {
            if (std::find(labels.begin(), labels.end(), i) != labels.end()) continue;
            std::vector<int> free_labels(labels.size());
            for (size_t v = 0; v < labels.size(); ++v)
                free_labels[v] = labels[v] == kUnassigned && assignable(static_cast<int>(v)) ? 0 : -2;
            auto comps = label_components(*mesh_, free_labels, 0);
            std::vector<int> region;
            for (auto& c : comps) {
                std::vector<int> inner;
                for (int v : c) {
                    bool ok = true;
                    for (int w : mesh_->neighbors(v))
                        if (labels[w] != kUnassigned) ok = false;
                    if (ok) inner.push_back(v);
                }
                if (component_weight(lumped_, inner) > component_weight(lumped_, region)) region = inner;
            }
            if (region.empty()) {
                std::vector<int> count(k_, 0);
                for (int l : labels)
                    if (l >= 0) ++count[l];
                const int donor = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
                int deepest = -1;
                for (int v = 0; v < mesh_->vertex_count(); ++v)
                    if (labels[v] == donor &&
                        (deepest < 0 || part.part_fields[donor].values[v] > part.part_fields[donor].values[deepest]))
                        deepest = v;
                if (deepest < 0) continue;
                region = {deepest};
                for (int w : mesh_->neighbors(deepest)) labels[w] = labels[w] == donor ? kUnassigned : labels[w];
            }
            for (int v : region) labels[v] = i;
            restarts.push_back("part " + std::to_string(i) + " emptied; restarted on " +
                               std::to_string(region.size()) + " vertices");
            warm_[i] = Vector();
            warm_ext_[i] = Vector();
        }
    }

    std::vector<std::string> restarts;

private:
    MeshPtr mesh_;
    int k_;
    OptimizerOptions opt_;
    Potential potential_;
    Forms forms_;
    double min_potential_ = 0.0;
    Vector lumped_;
    double penalty_ = 0.0;
    std::vector<Vector> warm_;
    std::vector<Vector> warm_ext_;
};

inline std::string format_p(double p) { return std::isinf(p) ? std::string("inf") : std::to_string(p); }

}  // namespace detail

/// Seed vertex labels (before separation) for the given spec and draw.
inline std::vector<int> seed_labels(const Mesh& mesh, int k, const SeedSpec& seed, int draw = 0) {
    const int nv = mesh.vertex_count();
    std::vector<int> labels(nv, kUnassigned);
    std::vector<int> interior;
    for (int v = 0; v < nv; ++v)
        if (!mesh.is_dirichlet_vertex(v)) interior.push_back(v);
    if (static_cast<int>(interior.size()) < k) throw InvalidArgument("optimize: fewer interior vertices than parts");
    Point c{};
    for (const auto& p : mesh.vertices()) c = c + p;
    c = (1.0 / nv) * c;
    switch (seed.kind) {
        case SeedKind::Voronoi: {
            std::mt19937_64 rng(seed.rng_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(draw));
            std::vector<int> sites;
            std::sample(interior.begin(), interior.end(), std::back_inserter(sites), k, rng);
            std::shuffle(sites.begin(), sites.end(), rng);
            for (int v : interior) {
                int best = 0;
                for (int i = 1; i < k; ++i)
                    if (norm(mesh.vertices()[v] - mesh.vertices()[sites[i]]) <
                        norm(mesh.vertices()[v] - mesh.vertices()[sites[best]]))
                        best = i;
                labels[v] = best;
            }
            break;
        }
        case SeedKind::Sectors:
            for (int v : interior) {
                double ang = std::atan2(mesh.vertices()[v].y - c.y, mesh.vertices()[v].x - c.x);
                if (ang < 0) ang += 2 * std::numbers::pi;
                labels[v] = std::min(k - 1, static_cast<int>(ang / (2 * std::numbers::pi) * k));
            }
            break;
        case SeedKind::Strips: {
            double lo = kInfinity, hi = -kInfinity;
            for (const auto& p : mesh.vertices()) {
                lo = std::min(lo, p.x);
                hi = std::max(hi, p.x);
            }
            for (int v : interior)
                labels[v] = std::min(k - 1, static_cast<int>((mesh.vertices()[v].x - lo) / (hi - lo) * k));
            break;
        }
        case SeedKind::File:
            if (static_cast<int>(seed.labels.size()) != nv) throw InvalidArgument("optimize: seed labeling size mismatch");
            for (int v : interior) {
                if (seed.labels[v] < kUnassigned || seed.labels[v] >= k)
                    throw InvalidArgument("optimize: seed label out of range");
                labels[v] = seed.labels[v];
            }
            break;
    }
    return labels;
}

/// Builds and evaluates a partition from vertex labels (separated and made
/// connected first).
inline Partition make_partition(const MeshPtr& mesh, int k, std::vector<int> vertex_labels,
                                const Potential& potential = {}, double p = kInfinity,
                                const OptimizerOptions& opt = {}) {
    detail::Engine engine(mesh, k, potential, opt);
    for (int v = 0; v < mesh->vertex_count(); ++v)
        if (!engine.assignable(v)) vertex_labels[v] = kUnassigned;
    detail::separate(*mesh, vertex_labels, std::vector<double>(mesh->vertex_count(), 0.0));
    Partition part;
    part.vertex_labels = std::move(vertex_labels);
    engine.evaluate(part, p);
    engine.extend(part);
    engine.close_gaps(part);
    return part;
}

namespace detail {

inline Partition run_schedule(const MeshPtr& mesh, int k, const Potential& potential, const OptimizerOptions& opt,
                              std::vector<int> labels) {
    Engine engine(mesh, k, potential, opt);
    for (int v = 0; v < mesh->vertex_count(); ++v)
        if (!engine.assignable(v)) labels[v] = kUnassigned;
    separate(*mesh, labels, std::vector<double>(mesh->vertex_count(), 0.0));
    engine.keep_largest_components(labels);
    Partition dummy;
    dummy.part_fields.assign(k, ScalarField(mesh, Vector::Zero(mesh->vertex_count())));
    engine.repair_empty(labels, dummy);

    Partition cur;
    cur.vertex_labels = labels;
    for (double p : opt.p_schedule) {
        engine.evaluate(cur, p);
        cur.converged = false;
        for (int it = 0; it < opt.iter_cap; ++it) {
            engine.extend(cur);
            const auto prop = engine.propose(cur, p);
            std::vector<int> next = engine.finalize(prop.labels, prop.margin, cur);
            if (next == cur.vertex_labels) {
                cur.converged = true;
                break;
            }
            ++cur.iterations;
            Partition cand;
            cand.vertex_labels = std::move(next);
            engine.evaluate(cand, p);
            // Backtracking: when the full step overshoots, apply only the
            // most decisive half, quarter, ... of the label changes.
            std::vector<int> changed;
            for (int v = 0; v < mesh->vertex_count(); ++v)
                if (prop.labels[v] != cur.vertex_labels[v]) changed.push_back(v);
            std::stable_sort(changed.begin(), changed.end(),
                             [&](int a, int b) { return prop.margin[a] > prop.margin[b]; });
            for (size_t take = changed.size() / 2; !(cand.objective <= cur.objective) && take > 0; take /= 2) {
                std::vector<int> mix = cur.vertex_labels;
                for (size_t i = 0; i < take; ++i) mix[changed[i]] = prop.labels[changed[i]];
                std::vector<double> margin(mesh->vertex_count(), 0.0);
                for (size_t i = 0; i < take; ++i) margin[changed[i]] = kInfinity;
                for (int v = 0; v < mesh->vertex_count(); ++v)
                    if (margin[v] == 0.0) margin[v] = prop.margin[v];
                mix = engine.finalize(std::move(mix), margin, cur);
                if (mix == cur.vertex_labels) break;
                cand.vertex_labels = std::move(mix);
                engine.evaluate(cand, p);
            }
            for (auto& msg : engine.restarts) cur.log.push_back("p=" + format_p(p) + ": " + msg);
            engine.restarts.clear();
            if (!(cand.objective <= cur.objective)) {
                // Keep descent monotone: no acceptable step ends this exponent.
                cur.converged = true;
                engine.evaluate(cur, p);
                break;
            }
            const double drop = cur.objective - cand.objective;
            cand.iterations = cur.iterations;
            cand.history = std::move(cur.history);
            cand.log = std::move(cur.log);
            cur = std::move(cand);
            cur.history.push_back(cur.objective);
            if (drop < opt.stall_tol * cur.objective) {
                cur.converged = true;
                break;
            }
        }
        if (!cur.converged) cur.log.push_back("p=" + format_p(p) + ": iteration cap reached");
    }
    engine.extend(cur);
    engine.close_gaps(cur);
    return cur;
}

}  // namespace detail

/// Alternating minimization of the p-mean objective with continuation in p.
inline Partition optimize(const MeshPtr& mesh, int k, const Potential& potential = {},
                          const OptimizerOptions& opt = {}) {
    if (k < 1) throw InvalidArgument("optimize: k must be >= 1");
    if (opt.p_schedule.empty()) throw InvalidArgument("optimize: empty p schedule");
    for (size_t i = 0; i < opt.p_schedule.size(); ++i)
        if (!(opt.p_schedule[i] >= 1.0) || (i > 0 && !(opt.p_schedule[i] > opt.p_schedule[i - 1])))
            throw InvalidArgument("optimize: p schedule must be increasing and >= 1");
    const int draws = opt.seed.kind == SeedKind::Voronoi ? std::max(1, opt.seed.draws) : 1;
    Partition best;
    for (int d = 0; d < draws; ++d) {
        auto labels = seed_labels(*mesh, k, opt.seed, d);
        Partition run = detail::run_schedule(mesh, k, potential, opt, std::move(labels));
        run.log.insert(run.log.begin(), "draw " + std::to_string(d) + ": objective " + std::to_string(run.objective));
        if (d == 0 || run.objective < best.objective) {
            auto prev_log = std::move(best.log);
            best = std::move(run);
            best.log.insert(best.log.begin(), prev_log.begin(), prev_log.end());
        } else {
            best.log.push_back(run.log.front());
        }
    }
    return best;
}

/// Carries part labels from one mesh of a domain to another: a target
/// vertex takes the label of the source triangle containing it (or the
/// nearest one), kUnassigned where containing triangles disagree.
inline std::vector<int> transfer_labels(const Labeling& source, const Mesh& target) {
    const Mesh& src = *source.mesh;
    double x0 = kInfinity, y0 = kInfinity, x1 = -kInfinity, y1 = -kInfinity;
    for (const auto& p : src.vertices()) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(src.triangle_count()) / 2.0)));
    const double cw = std::max(x1 - x0, 1e-300) / cells, ch = std::max(y1 - y0, 1e-300) / cells;
    auto cell_of = [&](double x, double y) {
        const int i = std::clamp(static_cast<int>((x - x0) / cw), 0, cells - 1);
        const int j = std::clamp(static_cast<int>((y - y0) / ch), 0, cells - 1);
        return std::pair{i, j};
    };
    std::vector<std::vector<int>> bucket(static_cast<size_t>(cells) * cells);
    for (int t = 0; t < src.triangle_count(); ++t) {
        double tx0 = kInfinity, ty0 = kInfinity, tx1 = -kInfinity, ty1 = -kInfinity;
        for (int v : src.triangles()[t]) {
            tx0 = std::min(tx0, src.vertices()[v].x);
            ty0 = std::min(ty0, src.vertices()[v].y);
            tx1 = std::max(tx1, src.vertices()[v].x);
            ty1 = std::max(ty1, src.vertices()[v].y);
        }
        const auto [i0, j0] = cell_of(tx0, ty0);
        const auto [i1, j1] = cell_of(tx1, ty1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) bucket[static_cast<size_t>(j) * cells + i].push_back(t);
    }
    // Smallest barycentric coordinate of p in t (>= 0 inside).
    auto inside = [&](int t, Point p) {
        const auto& tri = src.triangles()[t];
        const Point a = src.vertices()[tri[0]], b = src.vertices()[tri[1]], c = src.vertices()[tri[2]];
        const double area = cross(b - a, c - a);
        return std::min({cross(b - p, c - p) / area, cross(c - p, a - p) / area, cross(a - p, b - p) / area});
    };
    std::vector<int> out(target.vertex_count(), kUnassigned);
    for (int v = 0; v < target.vertex_count(); ++v) {
        const Point p = target.vertices()[v];
        const auto [ci, cj] = cell_of(p.x, p.y);
        int best = -1;
        double best_in = -kInfinity;
        std::vector<int> labels;
        for (int ring = 0; ring <= cells && best_in < -1e-9; ++ring) {
            for (int i = ci - ring; i <= ci + ring; ++i)
                for (int j = cj - ring; j <= cj + ring; ++j) {
                    if (i < 0 || j < 0 || i >= cells || j >= cells) continue;
                    if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
                    for (int t : bucket[static_cast<size_t>(j) * cells + i]) {
                        const double in = inside(t, p);
                        if (in >= -1e-9) labels.push_back(source.labels[t]);
                        if (in > best_in) {
                            best_in = in;
                            best = t;
                        }
                    }
                }
            if (ring >= 1 && best >= 0) break;
        }
        if (labels.empty() && best >= 0) labels.push_back(source.labels[best]);
        if (!labels.empty() && std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; }))
            out[v] = labels[0];
    }
    return out;
}

/// Optimizes on the coarsest mesh with the full schedule, then on each finer
/// mesh of the same domain starting from the transferred labeling, using
/// the last two exponents of the schedule.
inline Partition optimize_multilevel(const std::vector<MeshPtr>& levels, int k, double potential = 0.0,
                                     const OptimizerOptions& opt = {}) {
    if (levels.empty()) throw InvalidArgument("optimize_multilevel: no meshes");
    Partition cur = optimize(levels.front(), k, potential, opt);
    int iterations = cur.iterations;
    std::vector<double> history = cur.history;
    std::vector<std::string> log = cur.log;
    for (size_t l = 1; l < levels.size(); ++l) {
        OptimizerOptions fine = opt;
        fine.seed.kind = SeedKind::File;
        fine.seed.labels = transfer_labels(cur.labeling, *levels[l]);
        const size_t keep = std::min<size_t>(2, opt.p_schedule.size());
        fine.p_schedule.assign(opt.p_schedule.end() - static_cast<long>(keep), opt.p_schedule.end());
        cur = optimize(levels[l], k, potential, fine);
        iterations += cur.iterations;
        history.insert(history.end(), cur.history.begin(), cur.history.end());
        log.push_back("level " + std::to_string(l) + ": objective " + std::to_string(cur.objective));
        log.insert(log.end(), cur.log.begin(), cur.log.end());
    }
    cur.iterations = iterations;
    cur.history = std::move(history);
    cur.log = std::move(log);
    return cur;
}

/// (max - min) / max of the part energies.
inline double equalization_gap(const Partition& part) {
    if (part.part_values.empty()) throw InvalidArgument("equalization_gap: empty partition");
    const auto [lo, hi] = std::minmax_element(part.part_values.begin(), part.part_values.end());
    return (*hi - *lo) / *hi;
}

namespace detail {

inline std::vector<char> free_vertices(const Mesh& mesh) {
    std::vector<char> free(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) free[v] = !mesh.is_dirichlet_vertex(v);
    return free;
}

}  // namespace detail

struct SignedCombination {
    ScalarField field;
    /// Coloring sign of each part.
    std::vector<int> signs;
    /// Nonnegative amplitudes a_i, unit Euclidean norm.
    std::vector<double> scales;
    double rayleigh = 0.0;
    /// ||K w - rq M w|| / ||K w|| over free vertices.
    double residual = 0.0;
};

/// For a bipartite partition: w = sum eps_i a_i u_i with eps from the
/// two-coloring and a minimizing ||(K - Lambda M) w||. std::nullopt when
/// the partition graph is not bipartite or a part is empty.
inline std::optional<SignedCombination> signed_combination(const Partition& part) {
    if (!std::isfinite(part.objective)) return std::nullopt;
    const auto bip = is_bipartite(partition_graph(part.labeling));
    if (!bip.bipartite) return std::nullopt;
    const Mesh& mesh = *part.labeling.mesh;
    const Forms forms = assemble(mesh, part.potential);
    const auto free = detail::free_vertices(mesh);
    const int k = part.k();
    const int nv = mesh.vertex_count();
    Eigen::MatrixXd g(nv, k);
    for (int i = 0; i < k; ++i) {
        const double eps = bip.coloring[i] == 0 ? 1.0 : -1.0;
        g.col(i) = eps * (forms.stiffness * part.part_fields[i].values - part.objective * (forms.mass * part.part_fields[i].values));
    }
    for (int v = 0; v < nv; ++v)
        if (!free[v]) g.row(v).setZero();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.transpose() * g);
    Eigen::VectorXd a = es.eigenvectors().col(0);
    if (a.sum() < 0) a = -a;
    SignedCombination out{ScalarField(part.labeling.mesh, Vector::Zero(nv)), {}, {}, 0.0, 0.0};
    Vector w = Vector::Zero(nv);
    for (int i = 0; i < k; ++i) {
        const int eps = bip.coloring[i] == 0 ? 1 : -1;
        out.signs.push_back(eps);
        out.scales.push_back(std::max(a[i], 0.0));
        w += eps * std::max(a[i], 0.0) * part.part_fields[i].values;
    }
    out.rayleigh = rayleigh_quotient(w, forms);
    Vector kw = forms.stiffness * w;
    Vector r = kw - out.rayleigh * (forms.mass * w);
    for (int v = 0; v < nv; ++v)
        if (!free[v]) r[v] = kw[v] = 0.0;
    out.residual = r.norm() / kw.norm();
    out.field = ScalarField(part.labeling.mesh, std::move(w));
    return out;
}

struct InequalityResiduals {
    double i1 = 0.0;
    double i2 = 0.0;
    /// Amplitudes a_i used for the scaled fields a_i u_i.
    std::vector<double> scales;
};

/// Discrete weak-form check of the two differential inequalities satisfied
/// by the scaled ground states of a minimal partition, tested against every
/// hat function of a free vertex:
///   (I1)  a(u_i, phi) - Lambda m(u_i, phi) <= 0,
///   (I2)  a(v_i, phi) - Lambda m(v_i, phi) >= 0,  v_i = u_i - sum_{j != i} u_j.
/// Each violation is divided by max_phi (|a(v, phi)| + Lambda |m(v, phi)|)
/// for the same field v.
/// Scales default to those of the signed combination when the partition is
/// bipartite and to 1 otherwise.
inline InequalityResiduals inequality_residuals(const Partition& part, double lambda,
                                                std::vector<double> scales = {}) {
    if (!std::isfinite(lambda)) throw InvalidArgument("inequality_residuals: lambda must be finite");
    const int k = part.k();
    if (scales.empty()) {
        scales.assign(k, 1.0);
        if (auto sc = signed_combination(part)) {
            const double mx = *std::max_element(sc->scales.begin(), sc->scales.end());
            for (int i = 0; i < k; ++i) scales[i] = sc->scales[i] / mx;
        }
    }
    if (static_cast<int>(scales.size()) != k) throw InvalidArgument("inequality_residuals: scale count != k");
    const Mesh& mesh = *part.labeling.mesh;
    const Forms forms = assemble(mesh, part.potential);
    const auto free = detail::free_vertices(mesh);
    auto violation = [&](const Vector& u, double sign) {
        const Vector ku = forms.stiffness * u;
        const Vector mu = lambda * (forms.mass * u);
        const Vector r = sign * (ku - mu);
        const Vector ref = ku.cwiseAbs() + mu.cwiseAbs();
        double worst = 0.0, scale = 0.0;
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            if (!free[v]) continue;
            worst = std::max(worst, r[v]);
            scale = std::max(scale, ref[v]);
        }
        return scale > 0.0 ? worst / scale : 0.0;
    };
    InequalityResiduals out;
    out.scales = scales;
    Vector total = Vector::Zero(mesh.vertex_count());
    for (int i = 0; i < k; ++i) total += scales[i] * part.part_fields[i].values;
    for (int i = 0; i < k; ++i) {
        const Vector ui = scales[i] * part.part_fields[i].values;
        out.i1 = std::max(out.i1, violation(ui, 1.0));
        out.i2 = std::max(out.i2, violation(2.0 * ui - total, -1.0));
    }
    return out;
}

/// Second mixed-problem eigenfunction on a half domain and how its nodal
/// domains meet the Neumann part of the symmetry axis.
struct DnAnalysis {
    double lambda = 0.0;
    ScalarField field;
    Labeling domains;
    /// Nodal domains (indices into `domains`) reaching the Neumann segment.
    std::vector<int> touching;
};

namespace detail {

inline std::vector<char> neumann_axis_vertices(const Mesh& half, const Axis& axis) {
    double scale = 0.0;
    for (const auto& p : half.vertices()) scale = std::max(scale, norm(p - axis.origin));
    std::vector<char> out(half.vertex_count(), 0);
    for (int v = 0; v < half.vertex_count(); ++v)
        out[v] = !half.is_dirichlet_vertex(v) && half.is_boundary_vertex(v) &&
                 std::abs(axis.signed_distance(half.vertices()[v])) <= 1e-9 * scale;
    return out;
}

}  // namespace detail

inline DnAnalysis dn_analyze(const MeshPtr& half, const Axis& axis, double zero_tol = 1e-8) {
    auto spec = mixed_bc_solve(half, 0.0, 2);
    DnAnalysis out{spec.pairs[1].value, spec.pairs[1].field, {}, {}};
    out.domains = extract_nodal_domains(out.field, zero_tol);
    const auto on_axis = detail::neumann_axis_vertices(*half, axis);
    const double thr = zero_tol * out.field.values.cwiseAbs().maxCoeff();
    for (int d = 0; d < out.domains.k; ++d)
        for (int v = 0; v < half->vertex_count(); ++v) {
            const double u = out.field.values[v];
            if (on_axis[v] && std::abs(u) > thr && (u > 0) == (out.domains.part_sign[d] > 0)) {
                out.touching.push_back(d);
                break;
            }
        }
    return out;
}

struct DnCandidate {
    Partition partition;
    /// Eigenvalue of the mixed problem on the half domain.
    double dn_eigenvalue = 0.0;
    /// False when both nodal domains reach the Neumann segment, in which
    /// case the output is the flagged 2-partition.
    bool three_parts = true;
    std::string diagnostic;
};

/// Symmetric candidate partition from the mixed Dirichlet-Neumann problem on
/// a half domain whose symmetry axis is partly Neumann: the nodal domain of
/// the second eigenfunction that reaches the Neumann segment merges with its
/// mirror image, the other one stays separate from its own.
inline DnCandidate dn_symmetric_candidate(const MeshPtr& half, const Axis& axis, double zero_tol = 1e-8) {
    const DnAnalysis dn = dn_analyze(half, axis, zero_tol);
    if (dn.domains.k != 2)
        throw ConstructionFailure("dn_symmetric_candidate: second eigenfunction (lambda = " +
                                  std::to_string(dn.lambda) + ") has " + std::to_string(dn.domains.k) +
                                  " nodal domains, expected 2");
    if (dn.touching.empty())
        throw ConstructionFailure("dn_symmetric_candidate: no nodal domain reaches a Neumann segment of the axis "
                                  "(lambda = " + std::to_string(dn.lambda) + ")");
    DnCandidate out;
    out.dn_eigenvalue = dn.lambda;
    out.three_parts = dn.touching.size() == 1;
    const Mesh& h = *half;
    const double thr = zero_tol * dn.field.values.cwiseAbs().maxCoeff();
    // Half-domain vertex labels by sign, then separated along the nodal line.
    std::vector<int> hl(h.vertex_count(), kUnassigned);
    std::vector<double> margin(h.vertex_count(), 0.0);
    const int positive = dn.domains.part_sign[0] > 0 ? 0 : 1;
    for (int v = 0; v < h.vertex_count(); ++v) {
        const double u = dn.field.values[v];
        if (h.is_dirichlet_vertex(v) || std::abs(u) <= thr) continue;
        hl[v] = u > 0 ? positive : 1 - positive;
        margin[v] = std::abs(u);
    }
    detail::separate(h, hl, margin);
    const int merged = dn.touching.front();
    const ReflectedMesh rm = reflect_mesh(h, axis);
    const MeshPtr full = share(rm.mesh);
    std::vector<int> labels(full->vertex_count(), kUnassigned);
    for (int w = 0; w < full->vertex_count(); ++w) {
        const int d = hl[rm.source[w]];
        if (d == kUnassigned) continue;
        if (!out.three_parts) labels[w] = d;
        else labels[w] = d == merged ? 0 : (rm.mirrored[w] ? 2 : 1);
    }
    out.partition = make_partition(full, out.three_parts ? 3 : 2, std::move(labels));
    if (!out.three_parts) {
        out.diagnostic = "both nodal domains reach the Neumann segment; 2-part output";
        out.partition.log.push_back(out.diagnostic);
    }
    return out;
}

struct DnSweepPoint {
    double t = 0.0;
    double lambda = 0.0;
    /// 3 for a valid candidate, 2 when both domains reach the Neumann
    /// segment, 0 when none does or the nodal count is not 2.
    int parts = 0;
};

struct DnSweep {
    std::vector<DnSweepPoint> points;
    /// Index into `points` of the largest t giving a 3-part candidate, or -1.
    int best = -1;
};

/// Evaluates the mixed problem for the half meshes produced by `half_for_t`
/// at the given increasing t values. The best candidate is the largest valid
/// t, located by bisection when `bisect` is set (validity is monotone: more
/// Neumann lowers the eigenvalue until the second domain reaches it).
inline DnSweep dn_parameter_sweep(const std::function<MeshPtr(double)>& half_for_t, const Axis& axis,
                                  const std::vector<double>& ts, bool bisect = false) {
    DnSweep out;
    out.points.resize(ts.size());
    std::vector<char> done(ts.size(), 0);
    auto eval = [&](size_t i) {
        if (done[i]) return out.points[i].parts;
        done[i] = 1;
        const DnAnalysis dn = dn_analyze(half_for_t(ts[i]), axis);
        int parts = 0;
        if (dn.domains.k == 2 && !dn.touching.empty()) parts = dn.touching.size() == 1 ? 3 : 2;
        out.points[i] = {ts[i], dn.lambda, parts};
        return parts;
    };
    if (!bisect) {
        for (size_t i = 0; i < ts.size(); ++i) eval(i);
        for (size_t i = 0; i < ts.size(); ++i)
            if (out.points[i].parts == 3) out.best = static_cast<int>(i);
    } else {
        // Find the first valid index, then bisect for the last one.
        long lo = -1;
        for (size_t i = 0; i < ts.size() && lo < 0; ++i)
            if (eval(i) == 3) lo = static_cast<long>(i);
        if (lo >= 0) {
            long hi = static_cast<long>(ts.size());
            while (hi - lo > 1) {
                const long mid = (lo + hi) / 2;
                if (eval(static_cast<size_t>(mid)) == 3) lo = mid;
                else hi = mid;
            }
            out.best = static_cast<int>(lo);
        }
        std::vector<DnSweepPoint> kept;
        int best = -1;
        for (size_t i = 0; i < ts.size(); ++i)
            if (done[i]) {
                if (static_cast<int>(i) == out.best) best = static_cast<int>(kept.size());
                kept.push_back(out.points[i]);
            }
        out.points = std::move(kept);
        out.best = best;
    }
    return out;
}

/// Half of [0,1]x[0,1] below y = 1/2 with Neumann on the axis for x < t.
inline MeshPtr half_square_dn(double t, int n) {
    const Mesh base = build_rectangle(1.0, 0.5, n);
    return share(with_markers(base, [t](Point a, Point b) {
        const bool axis = std::abs(a.y - 0.5) < 1e-12 && std::abs(b.y - 0.5) < 1e-12;
        return axis && std::max(a.x, b.x) <= t + 1e-12 ? Marker::Neumann : Marker::Dirichlet;
    }));
}

/// Upper half of the unit disk with Neumann on the diameter for |x| < t.
inline MeshPtr half_disk_dn(double t, int rings) {
    const Mesh base = build_sector(std::numbers::pi, 1.0, rings);
    return share(with_markers(base, [t](Point a, Point b) {
        const bool axis = std::abs(a.y) < 1e-12 && std::abs(b.y) < 1e-12;
        return axis && std::max(std::abs(a.x), std::abs(b.x)) <= t + 1e-12 ? Marker::Neumann : Marker::Dirichlet;
    }));
}

}  // namespace minpart
