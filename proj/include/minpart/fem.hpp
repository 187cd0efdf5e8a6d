#pragma once

#include "minpart/error.hpp"
#include "minpart/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace minpart {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Per-vertex real values on a mesh.
struct ScalarField {
    MeshPtr mesh;
    Vector values;

    ScalarField() = default;
    ScalarField(MeshPtr m, Vector v) : mesh(std::move(m)), values(std::move(v)) {
        if (!mesh) throw InvalidArgument("ScalarField: null mesh");
        if (values.size() != mesh->vertex_count()) throw InvalidArgument("ScalarField: value count != vertex count");
    }

    static ScalarField interpolate(MeshPtr m, const std::function<double(Point)>& f) {
        Vector v(m->vertex_count());
        for (int i = 0; i < m->vertex_count(); ++i) v[i] = f(m->vertices()[i]);
        return {std::move(m), std::move(v)};
    }
};

/// Potential V of the operator -Laplace + V; either a constant or one value
/// per vertex. Elementwise it is represented by the average of the vertex
/// values, i.e. vertex-sampled data is effectively piecewise linear.
class Potential {
public:
    Potential() = default;
    /* implicit */ Potential(double constant) : data_(constant) {}
    explicit Potential(Vector per_vertex) : data_(std::move(per_vertex)) {}

    Vector values_on(const Mesh& mesh) const {
        if (const double* c = std::get_if<double>(&data_)) return Vector::Constant(mesh.vertex_count(), *c);
        const auto& v = std::get<Vector>(data_);
        if (v.size() != mesh.vertex_count()) throw InvalidArgument("potential: value count != vertex count");
        return v;
    }

    double minimum(const Mesh& mesh) const { return values_on(mesh).minCoeff(); }

private:
    std::variant<double, Vector> data_ = 0.0;
};

enum class MassKind { Consistent, Lumped };

/// Stiffness (Dirichlet energy + potential term) and mass forms on the full
/// vertex space; boundary conditions are applied later by the solvers.
struct Forms {
    SparseMatrix stiffness;
    SparseMatrix mass;
};

inline Forms assemble(const Mesh& mesh, const Potential& potential = {}, MassKind kind = MassKind::Consistent) {
    const Vector v = potential.values_on(mesh);
    std::vector<Eigen::Triplet<double>> k_trip, m_trip;
    k_trip.reserve(mesh.triangles().size() * 9);
    m_trip.reserve(mesh.triangles().size() * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double area = mesh.triangle_area(t);
        if (!(area > 0.0)) throw InvalidArgument("assemble: degenerate or inverted triangle");
        std::array<Point, 3> opp;
        for (int i = 0; i < 3; ++i)
            opp[i] = mesh.vertices()[tri[(i + 2) % 3]] - mesh.vertices()[tri[(i + 1) % 3]];
        const double v_mean = (v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double m_ij = 0.0;
                if (kind == MassKind::Consistent)
                    m_ij = area / 12.0 * (i == j ? 2.0 : 1.0);
                else if (i == j)
                    m_ij = area / 3.0;
                const double k_ij = dot(opp[i], opp[j]) / (4.0 * area) + v_mean * m_ij;
                k_trip.emplace_back(tri[i], tri[j], k_ij);
                if (m_ij != 0.0) m_trip.emplace_back(tri[i], tri[j], m_ij);
            }
    }
    Forms f;
    const int n = mesh.vertex_count();
    f.stiffness.resize(n, n);
    f.mass.resize(n, n);
    f.stiffness.setFromTriplets(k_trip.begin(), k_trip.end());
    f.mass.setFromTriplets(m_trip.begin(), m_trip.end());
    return f;
}

struct EigenPair {
    double value = 0.0;
    ScalarField field;  ///< unit norm in the mass inner product
    double residual = 0.0;
};

struct Spectrum {
    std::vector<EigenPair> pairs;
    double cluster_tol = 1e-6;
    /// Indices of numerically degenerate groups (relative gap <= cluster_tol).
    std::vector<std::vector<int>> clusters;
    /// Constant added to V internally to make the stiffness form definite.
    double shift = 0.0;
    int iterations = 0;

    std::vector<double> values() const {
        std::vector<double> out;
        for (const auto& p : pairs) out.push_back(p.value);
        return out;
    }
    /// Cluster id of each eigenpair.
    std::vector<int> cluster_of() const {
        std::vector<int> out(pairs.size(), -1);
        for (size_t c = 0; c < clusters.size(); ++c)
            for (int i : clusters[c]) out[i] = static_cast<int>(c);
        return out;
    }
};

struct EigenOptions {
    double tol = 1e-8;
    int max_iterations = 2000;
    /// Extra block vectors beyond the requested count.
    int padding = 5;
    double cluster_tol = 1e-6;
    /// Optional starting vectors on the full vertex space.
    std::vector<Vector> warm_start;
};

namespace detail {

// Row/column restriction of a symmetric matrix to the listed vertices.
inline SparseMatrix restrict_matrix(const SparseMatrix& a, const std::vector<int>& local_of, int n_local) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(a.nonZeros()));
    for (int col = 0; col < a.outerSize(); ++col) {
        const int lc = local_of[col];
        if (lc < 0) continue;
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            const int lr = local_of[it.row()];
            if (lr >= 0) trip.emplace_back(lr, lc, it.value());
        }
    }
    SparseMatrix out(n_local, n_local);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

struct SubspaceResult {
    Vector values;
    Eigen::MatrixXd vectors;  // columns, mass-orthonormal
    Vector residuals;
    int iterations = 0;
};

// Block inverse (shift-invert at sigma = 0) subspace iteration with
// Rayleigh-Ritz projection and locking of converged leading vectors. The
// stiffness must be positive definite on the free space.
inline SubspaceResult subspace_iteration(const SparseMatrix& k, const SparseMatrix& m, int count,
                                         const EigenOptions& opt, const Eigen::MatrixXd& start) {
    const int n = static_cast<int>(k.rows());
    const int block = std::min(n, count + std::max(opt.padding, 0));
    Eigen::SimplicialLDLT<SparseMatrix> solver(k);
    if (solver.info() != Eigen::Success) throw SolverFailure("eigensolver: factorization of the stiffness form failed");

    Eigen::MatrixXd x(n, block);
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int j = 0; j < block; ++j) {
        if (j < start.cols() && start.col(j).norm() > 0.0)
            x.col(j) = start.col(j);
        else
            for (int i = 0; i < n; ++i) x(i, j) = uni(rng);
    }

    SubspaceResult res;
    int locked = 0;
    Eigen::MatrixXd y(n, block);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        const Eigen::MatrixXd mx = m * x.rightCols(block - locked);
        y.leftCols(locked) = x.leftCols(locked);
        for (int j = locked; j < block; ++j) y.col(j) = solver.solve(mx.col(j - locked));
        // Normalize columns for a well-conditioned projected problem.
        Eigen::MatrixXd my = m * y;
        for (int j = 0; j < block; ++j) {
            const double s = std::sqrt(std::max(y.col(j).dot(my.col(j)), 0.0));
            if (s > 0.0) {
                y.col(j) /= s;
                my.col(j) /= s;
            }
        }
        const Eigen::MatrixXd ky = k * y;
        Eigen::MatrixXd a = y.transpose() * ky;
        Eigen::MatrixXd b = y.transpose() * my;
        a = 0.5 * (a + a.transpose());
        b = 0.5 * (b + b.transpose());
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(a, b);
        if (rr.info() != Eigen::Success) throw SolverFailure("eigensolver: Rayleigh-Ritz projection failed");
        x = y * rr.eigenvectors();
        const Eigen::MatrixXd kx = ky * rr.eigenvectors();
        const Eigen::MatrixXd mxn = my * rr.eigenvectors();
        res.values = rr.eigenvalues();
        res.residuals.resize(count);
        for (int j = 0; j < count; ++j) res.residuals[j] = (kx.col(j) - res.values[j] * mxn.col(j)).norm();
        int conv = 0;
        while (conv < count && res.residuals[conv] <= opt.tol) ++conv;
        res.iterations = it;
        if (conv >= count) {
            res.vectors = x.leftCols(count);
            res.values.conservativeResize(count);
            return res;
        }
        locked = conv;
    }
    std::ostringstream msg;
    msg << "eigensolver: no convergence after " << opt.max_iterations << " iterations; worst residual "
        << res.residuals.maxCoeff() << " (tol " << opt.tol << ")";
    throw SolverFailure(msg.str());
}

// Deterministic sign: the entry of largest magnitude is positive.
inline void fix_sign(Eigen::Ref<Vector> v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
}

inline std::vector<std::vector<int>> cluster_values(const std::vector<double>& values, double tol) {
    std::vector<std::vector<int>> clusters;
    for (size_t i = 0; i < values.size(); ++i) {
        if (!clusters.empty()) {
            const double prev = values[clusters.back().back()];
            const double scale = std::max({std::abs(prev), std::abs(values[i]), 1e-300});
            if (std::abs(values[i] - prev) <= tol * scale) {
                clusters.back().push_back(static_cast<int>(i));
                continue;
            }
        }
        clusters.push_back({static_cast<int>(i)});
    }
    return clusters;
}

// Solves on the vertices flagged free; everything else is held at zero.
inline Spectrum solve_constrained(const MeshPtr& mesh, const Forms& forms, double min_potential,
                                  const std::vector<char>& free, int count, const EigenOptions& opt) {
    const int nv = mesh->vertex_count();
    std::vector<int> local_of(nv, -1), global_of;
    for (int v = 0; v < nv; ++v)
        if (free[v]) {
            local_of[v] = static_cast<int>(global_of.size());
            global_of.push_back(v);
        }
    const int n = static_cast<int>(global_of.size());
    if (count < 1) throw InvalidArgument("eigensolver: eigenpair count must be >= 1");
    if (count >= n && !(count == 1 && n == 1))
        throw InvalidArgument("eigensolver: requested " + std::to_string(count) + " eigenpairs but only " +
                              std::to_string(n) + " free degrees of freedom");

    Spectrum spec;
    spec.cluster_tol = opt.cluster_tol;
    // Keep K + shift*M positive definite when V dips below zero.
    spec.shift = min_potential < 0.0 ? 1.0 - min_potential : 0.0;

    SparseMatrix k = restrict_matrix(forms.stiffness, local_of, n);
    const SparseMatrix m = restrict_matrix(forms.mass, local_of, n);
    if (spec.shift != 0.0) k += spec.shift * m;

    Eigen::MatrixXd start(n, static_cast<Eigen::Index>(opt.warm_start.size()));
    for (size_t j = 0; j < opt.warm_start.size(); ++j) {
        if (opt.warm_start[j].size() != nv) throw InvalidArgument("eigensolver: warm start size mismatch");
        for (int i = 0; i < n; ++i) start(i, static_cast<Eigen::Index>(j)) = opt.warm_start[j][global_of[i]];
    }
    auto res = subspace_iteration(k, m, count, opt, start);
    spec.iterations = res.iterations;
    for (int j = 0; j < count; ++j) {
        Vector full = Vector::Zero(nv);
        for (int i = 0; i < n; ++i) full[global_of[i]] = res.vectors(i, j);
        fix_sign(full);
        spec.pairs.push_back({res.values[j] - spec.shift, ScalarField(mesh, std::move(full)), res.residuals[j]});
    }
    spec.clusters = cluster_values(spec.values(), opt.cluster_tol);
    return spec;
}

}  // namespace detail

/// The `count` smallest eigenpairs with every boundary vertex clamped.
inline Spectrum solve_eigen(const MeshPtr& mesh, const Potential& potential, int count, EigenOptions opt = {}) {
    const Forms forms = assemble(*mesh, potential);
    std::vector<char> free(mesh->vertex_count());
    for (int v = 0; v < mesh->vertex_count(); ++v) free[v] = !mesh->is_boundary_vertex(v);
    return detail::solve_constrained(mesh, forms, potential.minimum(*mesh), free, count, opt);
}

/// Like solve_eigen, but only Dirichlet-marked boundary vertices are
/// clamped; Neumann conditions are natural.
inline Spectrum mixed_bc_solve(const MeshPtr& mesh, const Potential& potential, int count, EigenOptions opt = {}) {
    std::vector<char> free(mesh->vertex_count());
    bool any_dirichlet = false;
    for (int v = 0; v < mesh->vertex_count(); ++v) {
        free[v] = !mesh->is_dirichlet_vertex(v);
        any_dirichlet |= !free[v];
    }
    if (!any_dirichlet) throw InvalidArgument("mixed_bc_solve: boundary has no Dirichlet part");
    const Forms forms = assemble(*mesh, potential);
    return detail::solve_constrained(mesh, forms, potential.minimum(*mesh), free, count, opt);
}

/// Ground state of the operator restricted to functions vanishing outside
/// `support` (and on the Dirichlet boundary). std::nullopt stands for the
/// empty space, whose first eigenvalue is +infinity.
inline std::optional<EigenPair> ground_state_on_support(const MeshPtr& mesh, const Forms& forms,
                                                        double min_potential, std::span<const char> support,
                                                        EigenOptions opt = {}) {
    if (static_cast<int>(support.size()) != mesh->vertex_count())
        throw InvalidArgument("ground_state_on_support: mask length != vertex count");
    std::vector<char> free(mesh->vertex_count());
    int n = 0;
    for (int v = 0; v < mesh->vertex_count(); ++v) {
        free[v] = support[v] && !mesh->is_dirichlet_vertex(v);
        n += free[v];
    }
    if (n == 0) return std::nullopt;
    opt.padding = std::min(opt.padding, n - 1);
    auto spec = detail::solve_constrained(mesh, forms, min_potential, free, 1, opt);
    return std::move(spec.pairs.front());
}

inline std::optional<EigenPair> ground_state_on_support(const MeshPtr& mesh, std::span<const char> support,
                                                        const Potential& potential = {}, EigenOptions opt = {}) {
    return ground_state_on_support(mesh, assemble(*mesh, potential), potential.minimum(*mesh), support,
                                   std::move(opt));
}

/// Energy of an optional ground state, +infinity for the empty sentinel.
inline double energy_of(const std::optional<EigenPair>& gs) {
    return gs ? gs->value : std::numeric_limits<double>::infinity();
}

inline double rayleigh_quotient(const Vector& u, const Forms& forms) {
    const double denom = u.dot(forms.mass * u);
    if (!(denom > 0.0)) throw InvalidArgument("rayleigh_quotient: field vanishes");
    return u.dot(forms.stiffness * u) / denom;
}

inline double rayleigh_quotient(const ScalarField& field, const Forms& forms) {
    return rayleigh_quotient(field.values, forms);
}

/// Mass-weighted L2 norm of a vertex vector.
inline double l2_norm(const Vector& u, const Forms& forms) { return std::sqrt(std::max(u.dot(forms.mass * u), 0.0)); }

/// Residual norm ||K u - lambda M u|| over the vertices flagged free, for u
/// normalized to unit mass norm.
inline double eigen_residual(const Vector& u, double lambda, const Forms& forms, const std::vector<char>& free) {
    const double nrm = l2_norm(u, forms);
    if (!(nrm > 0.0)) throw InvalidArgument("eigen_residual: field vanishes");
    const Vector r = (forms.stiffness * u - lambda * (forms.mass * u)) / nrm;
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        if (free[i]) s += r[i] * r[i];
    return std::sqrt(s);
}

}  // namespace minpart
