#include "minpart/io.hpp"
#include "minpart/minpart.hpp"

#include <CLI11/CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace minpart;

namespace {

struct Common {
    std::string out = ".";
    bool vtk = false;
};

struct Run {
    Common common;
    DomainSpec domain;
    double potential = 0.0;
    std::string potential_file;

    // spectrum / nodal
    int count = 6;
    bool mixed = false;
    int index = 1;
    double zero_tol = 1e-8;
    double tol = 1e-8;

    // partition
    int k = 2;
    std::string p_schedule = "1,2,4,8,16,32,inf";
    std::string seed_kind = "voronoi";
    std::string seed_file;
    int draws = 3;
    std::uint64_t seed = 1;
    int iter_cap = 200;
    double stall_tol = 1e-9;
    int levels = 3;
    std::string method = "optimize";

    // classify
    double rect_ratio = 1.0;
    int max_index = 8;
    bool disk = false;

    // bounds
    std::optional<double> lambda;
    int n_max = 30;
    int hexagon_n = 12;

    // bessel
    double order = 0.0;
    std::vector<double> xs;
};

int thread_count() {
    const char* env = std::getenv("MINPART_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) throw InvalidArgument("MINPART_THREADS must be an integer >= 1");
    return static_cast<int>(v);
}

std::vector<double> parse_schedule(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item == "inf" || item == "infinity") {
            out.push_back(kInfinity);
            continue;
        }
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty()) throw InvalidArgument("p schedule: cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty() || !std::isinf(out.back())) throw InvalidArgument("p schedule must end with inf");
    return out;
}

std::vector<int> read_ints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::vector<int> out;
    int v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw InvalidArgument("'" + path + "': expected integers");
    return out;
}

Potential load_potential(const Run& r, const Mesh& mesh) {
    if (r.potential_file.empty()) return r.potential;
    std::ifstream in(r.potential_file);
    if (!in) throw InvalidArgument("cannot open potential file '" + r.potential_file + "'");
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    if (!in.eof() || static_cast<int>(vals.size()) != mesh.vertex_count())
        throw InvalidArgument("potential file must hold one number per mesh vertex");
    return Potential(Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
}

std::ofstream open_out(const Common& c, const std::string& name) {
    fs::create_directories(c.out);
    std::ofstream os(fs::path(c.out) / name);
    if (!os) throw InvalidArgument("cannot write '" + (fs::path(c.out) / name).string() + "'");
    return os;
}

void write_json(const Common& c, const Json& j) { open_out(c, "report.json") << j.dump(2) << '\n'; }

Json domain_json(const DomainSpec& d, const Mesh& mesh) {
    Json j;
    j["kind"] = d.kind;
    j["n"] = d.n;
    j["refine"] = d.refine;
    j["vertices"] = mesh.vertex_count();
    j["triangles"] = mesh.triangle_count();
    j["area"] = mesh.domain_area();
    j["mesh_area"] = mesh.mesh_area();
    j["h"] = mesh.max_edge_length();
    return j;
}

void write_fields(const Common& c, const std::vector<ScalarField>& fields, const Mesh& mesh) {
    std::vector<std::pair<std::string, Vector>> named;
    for (size_t i = 0; i < fields.size(); ++i) {
        auto os = open_out(c, "field_" + std::to_string(i + 1) + ".csv");
        write_field_csv(os, fields[i]);
        named.emplace_back("field_" + std::to_string(i + 1), fields[i].values);
    }
    if (c.vtk) {
        auto os = open_out(c, "fields.vtk");
        write_vtk(os, mesh, named);
    }
}

int cmd_mesh(const Run& r) {
    const MeshPtr mesh = build_domain(r.domain);
    auto os = open_out(r.common, "mesh.txt");
    write_mesh(os, *mesh);
    Json j;
    j["domain"] = domain_json(r.domain, *mesh);
    j["edges"] = mesh->edge_count();
    j["boundary_edges"] = mesh->boundary_edges().size();
    j["issues"] = validate(*mesh);
    write_json(r.common, j);
    if (r.common.vtk) {
        auto vtk = open_out(r.common, "mesh.vtk");
        write_vtk(vtk, *mesh, {});
    }
    std::cout << "mesh: " << mesh->vertex_count() << " vertices, " << mesh->triangle_count() << " triangles, "
              << j["issues"].size() << " issues\n";
    return 0;
}

Spectrum solve(const Run& r, const MeshPtr& mesh, int count) {
    EigenOptions eo;
    eo.tol = r.tol;
    const Potential pot = load_potential(r, *mesh);
    return r.mixed ? mixed_bc_solve(mesh, pot, count, eo) : solve_eigen(mesh, pot, count, eo);
}

int cmd_spectrum(const Run& r) {
    const MeshPtr mesh = build_domain(r.domain);
    const Spectrum s = solve(r, mesh, r.count);
    Json j = to_json(s);
    std::vector<int> mu;
    std::vector<ScalarField> fields;
    for (const auto& p : s.pairs) {
        mu.push_back(nodal_count(p.field, r.zero_tol));
        fields.push_back(p.field);
    }
    j["nodal_counts"] = mu;
    j["shift"] = s.shift;
    j["domain"] = domain_json(r.domain, *mesh);
    write_json(r.common, j);
    write_fields(r.common, fields, *mesh);
    std::cout << "spectrum: lambda_1 = " << s.pairs.front().value << ", lambda_" << r.count << " = "
              << s.pairs.back().value << "\n";
    return 0;
}

int cmd_nodal(const Run& r) {
    const MeshPtr mesh = build_domain(r.domain);
    if (r.index < 1) throw InvalidArgument("nodal: index must be >= 1");
    const Spectrum s = solve(r, mesh, r.index);
    const ScalarField& f = s.pairs[r.index - 1].field;
    const Labeling lab = extract_nodal_domains(f, r.zero_tol);
    const auto lines = nodal_set(f, r.zero_tol);
    auto graph = partition_graph(lab);
    const auto bip = is_bipartite(graph);
    if (bip.bipartite) graph.coloring = bip.coloring;
    Json j;
    j["index"] = r.index;
    j["eigenvalue"] = s.pairs[r.index - 1].value;
    j["cluster"] = s.cluster_of()[r.index - 1];
    j["nodal_count"] = lab.k;
    j["unassigned_area"] = lab.unassigned_area();
    j["bipartite"] = bip.bipartite;
    j["graph"] = to_json(graph);
    const auto mult = multiplicity(lab);
    j["max_multiplicity"] = mult.m.empty() ? 0 : *std::max_element(mult.m.begin(), mult.m.end());
    Json tp = Json::array();
    for (const auto& t : triple_point_angles(lab, lines)) tp.push_back(to_json(t));
    j["junctions"] = tp;
    j["nodal_polylines"] = lines.size();
    j["domain"] = domain_json(r.domain, *mesh);
    write_json(r.common, j);
    auto lab_os = open_out(r.common, "labeling.csv");
    write_labeling_csv(lab_os, lab);
    auto ns_os = open_out(r.common, "nodal_set.csv");
    write_polylines_csv(ns_os, lines);
    auto f_os = open_out(r.common, "field_" + std::to_string(r.index) + ".csv");
    write_field_csv(f_os, f);
    std::cout << "nodal: eigenfunction " << r.index << " has " << lab.k << " nodal domains\n";
    return 0;
}

OptimizerOptions optimizer_options(const Run& r, const Mesh& finest) {
    OptimizerOptions o;
    o.p_schedule = parse_schedule(r.p_schedule);
    o.iter_cap = r.iter_cap;
    o.stall_tol = r.stall_tol;
    o.zero_tol = r.zero_tol;
    o.threads = thread_count();
    o.seed.rng_seed = r.seed;
    o.seed.draws = r.draws;
    if (r.seed_kind == "voronoi") o.seed.kind = SeedKind::Voronoi;
    else if (r.seed_kind == "sectors") o.seed.kind = SeedKind::Sectors;
    else if (r.seed_kind == "strips") o.seed.kind = SeedKind::Strips;
    else if (r.seed_kind == "file") {
        o.seed.kind = SeedKind::File;
        o.seed.labels = read_ints(r.seed_file);
        if (static_cast<int>(o.seed.labels.size()) != finest.vertex_count())
            throw InvalidArgument("seed file must hold one label per vertex of the finest mesh");
    } else {
        throw InvalidArgument("unknown seed kind '" + r.seed_kind + "'");
    }
    if (r.iter_cap < 1) throw InvalidArgument("iter-cap must be >= 1");
    if (!(r.stall_tol >= 0.0)) throw InvalidArgument("stall-tol must be >= 0");
    return o;
}

Json partition_extras(const Run& r, const Partition& part) {
    const Mesh& mesh = *part.labeling.mesh;
    Json j;
    j["domain"] = domain_json(r.domain, mesh);
    std::vector<Vector> ext;
    for (const auto& f : part.extended_fields) ext.push_back(f.values);
    Json tp = Json::array();
    for (const auto& t : triple_point_angles(part.labeling, interface_set(mesh, ext))) tp.push_back(to_json(t));
    j["triple_points"] = tp;
    const double fk = faber_krahn_lower(part.k(), mesh.domain_area());
    j["faber_krahn_lower"] = fk;
    const auto spec = solve_eigen(part.labeling.mesh, part.potential, part.k());
    j["lambda_k"] = spec.pairs.back().value;
    return j;
}

void write_partition_files(const Common& c, const Partition& part) {
    auto os = open_out(c, "labeling.csv");
    write_labeling_csv(os, part.labeling);
    write_fields(c, part.part_fields, *part.labeling.mesh);
    std::vector<Vector> ext;
    for (const auto& f : part.extended_fields) ext.push_back(f.values);
    auto ns = open_out(c, "nodal_set.csv");
    write_polylines_csv(ns, interface_set(*part.labeling.mesh, ext));
}

int cmd_partition_dn(const Run& r) {
    if (r.k != 3) throw InvalidArgument("partition: method dn builds 3-partitions only");
    std::function<MeshPtr(double)> half;
    Axis axis;
    double t_max = 1.0;
    int steps = 2 * r.domain.n;
    if (r.domain.kind == "square") {
        if (r.domain.n % 2 != 0) throw InvalidArgument("partition: method dn needs an even n");
        const int n = r.domain.n / 2;
        half = [n](double t) { return half_square_dn(t, n); };
        axis = Axis{{0.0, 0.5}, {1.0, 0.0}};
    } else if (r.domain.kind == "disk") {
        const int rings = r.domain.n;
        half = [rings](double t) { return half_disk_dn(t, rings); };
        axis = Axis{{0.0, 0.0}, {1.0, 0.0}};
        steps = rings;
    } else {
        throw InvalidArgument("partition: method dn supports the unit square and unit disk");
    }
    std::vector<double> ts;
    for (int i = 0; i <= steps; ++i) ts.push_back(t_max * i / steps);
    const DnSweep sweep = dn_parameter_sweep(half, axis, ts);
    if (sweep.best < 0) throw ConstructionFailure("partition: no t gives a symmetric 3-partition");
    const double t = sweep.points[static_cast<size_t>(sweep.best)].t;
    DnCandidate cand = dn_symmetric_candidate(half(t), axis, r.zero_tol);
    Json curve = Json::array();
    for (const auto& p : sweep.points) curve.push_back({{"t", p.t}, {"lambda", p.lambda}, {"parts", p.parts}});
    Json extras = partition_extras(r, cand.partition);
    extras["method"] = "dn";
    extras["t"] = t;
    extras["dn_eigenvalue"] = cand.dn_eigenvalue;
    extras["sweep"] = curve;
    write_json(r.common, to_json(cand.partition, extras));
    write_partition_files(r.common, cand.partition);
    std::cout << "partition (dn, t = " << t << "): objective " << cand.partition.objective << "\n";
    return 0;
}

int cmd_partition(const Run& r) {
    if (r.method == "dn") return cmd_partition_dn(r);
    if (r.method != "optimize") throw InvalidArgument("partition: unknown method '" + r.method + "'");
    if (r.k < 1) throw InvalidArgument("partition: k must be >= 1");
    std::vector<MeshPtr> levels = build_levels(r.domain, r.seed_kind == "file" ? 1 : r.levels);
    if (!r.potential_file.empty() && levels.size() > 1)
        throw InvalidArgument("partition: a per-vertex potential needs levels = 1");
    const OptimizerOptions opt = optimizer_options(r, *levels.back());
    Partition part = levels.size() == 1 ? optimize(levels.front(), r.k, load_potential(r, *levels.front()), opt)
                                        : optimize_multilevel(levels, r.k, r.potential, opt);
    Json extras = partition_extras(r, part);
    extras["method"] = "optimize";
    extras["seed"] = r.seed;
    write_json(r.common, to_json(part, extras));
    write_partition_files(r.common, part);
    std::cout << "partition: k = " << r.k << ", objective " << part.objective << ", gap "
              << equalization_gap(part) << (part.converged ? "" : " (not converged)") << "\n";
    return 0;
}

int cmd_classify(const Run& r) {
    Json j;
    std::ostringstream line;
    if (r.disk) {
        Json modes = Json::array();
        for (const auto& m : disk_spectrum(50))
            if (disk_courant_sharp(m.index[0], m.index[1]) &&
                (modes.empty() || modes.back() != Json(m.index)))
                modes.push_back(m.index);
        j["domain"] = "disk";
        j["courant_sharp"] = modes;
        for (const auto& m : modes) line << " (" << m[0] << "," << m[1] << ")";
    } else {
        if (!(r.rect_ratio > 0)) throw InvalidArgument("classify: ratio must be positive");
        if (r.max_index < 1) throw InvalidArgument("classify: max-index must be >= 1");
        Json modes = Json::array();
        for (int m = 1; m <= r.max_index; ++m)
            for (int n = 1; n <= r.max_index; ++n)
                if (rectangle_courant_sharp(m, n, r.rect_ratio)) {
                    modes.push_back({m, n});
                    line << " (" << m << "," << n << ")";
                }
        j["domain"] = "rectangle";
        j["ratio"] = r.rect_ratio;
        j["courant_sharp"] = modes;
    }
    write_json(r.common, j);
    std::cout << "courant-sharp:" << line.str() << "\n";
    return 0;
}

std::vector<SpectralEntry> domain_entries(const Run& r, const MeshPtr& mesh, int count) {
    if (r.domain.kind == "square") return entries_of(rectangle_spectrum(r.domain.a, r.domain.a, count));
    if (r.domain.kind == "rectangle") return entries_of(rectangle_spectrum(r.domain.a, r.domain.b, count));
    if (r.domain.kind == "disk") {
        auto e = entries_of(disk_spectrum(std::min(count, 50)));
        for (auto& x : e) x.eigenvalue /= r.domain.radius * r.domain.radius;
        return e;
    }
    return fem_entries(solve(r, mesh, count), r.zero_tol);
}

int cmd_bounds(const Run& r) {
    if (r.k < 1) throw InvalidArgument("bounds: k must be >= 1");
    if (r.n_max < 1) throw InvalidArgument("bounds: n-max must be >= 1");
    const MeshPtr mesh = build_domain(r.domain);
    const double lambda_k = solve(r, mesh, r.k).pairs.back().value;
    const auto entries = domain_entries(r, mesh, std::max(r.n_max, r.k));
    std::optional<double> L_k;
    if (r.domain.kind == "square") L_k = rectangle_Lk(r.domain.a, r.domain.a, r.k);
    else if (r.domain.kind == "rectangle") L_k = rectangle_Lk(r.domain.a, r.domain.b, r.k);
    else
        for (const auto& e : entries)
            if (e.nodal_count == r.k && !e.ambiguous) {
                L_k = e.eigenvalue;
                break;
            }
    const BoundsReport rep = make_bounds_report(r.k, mesh->domain_area(), lambda_k, L_k, r.lambda, 0.02, r.hexagon_n);
    Json j = to_json(rep);
    const auto scan = courant_sharp_scan(entries);
    j["courant_sharp_set"] = scan.sharp;
    j["courant_skipped"] = scan.skipped;
    const auto pl = pleijel_ratios(entries, r.n_max);
    j["pleijel_last_equal"] = pl.last_equal;
    j["domain"] = domain_json(r.domain, *mesh);
    for (const auto& w : scan.warnings) std::cerr << "warning: " << w << "\n";
    write_json(r.common, j);
    auto os = open_out(r.common, "pleijel.csv");
    detail::full_precision(os);
    os << "n,eigenvalue,nodal_count,ratio\n";
    for (size_t i = 0; i < pl.ratios.size(); ++i)
        os << i + 1 << ',' << entries[i].eigenvalue << ',' << entries[i].nodal_count << ',' << pl.ratios[i] << '\n';
    std::cout << "bounds: faber-krahn " << rep.faber_krahn_lower << ", hexagon rate " << rep.hexagon_rate
              << ", sandwich " << to_string(rep.sandwich_ok) << "\n";
    return 0;
}

int cmd_bessel(const Run& r) {
    if (r.count < 1) throw InvalidArgument("bessel: count must be >= 1");
    std::vector<double> zeros;
    for (int k = 1; k <= r.count; ++k) zeros.push_back(bessel_zero(r.order, k));
    Json j;
    j["order"] = r.order;
    j["zeros"] = zeros;
    Json vals = Json::array();
    for (double x : r.xs) vals.push_back({{"x", x}, {"value", bessel_j(r.order, x)}});
    j["values"] = vals;
    write_json(r.common, j);
    std::ostringstream csv;
    detail::full_precision(csv);
    csv << "k,zero\n";
    for (size_t i = 0; i < zeros.size(); ++i) csv << i + 1 << ',' << zeros[i] << '\n';
    open_out(r.common, "bessel.csv") << csv.str();
    std::cout << csv.str();
    return 0;
}

void add_common(CLI::App* app, Run& r) {
    app->add_option("-o,--out", r.common.out, "Output directory")->capture_default_str();
    app->add_flag("--vtk", r.common.vtk, "Also write legacy VTK files");
    app->set_version_flag("--version", MINPART_VERSION);
}

void add_domain(CLI::App* app, Run& r) {
    app->add_option("--domain", r.domain.kind, "square | rectangle | disk | sector | hexagon | file")
        ->capture_default_str();
    app->add_option("--a", r.domain.a, "Square side or rectangle width")->capture_default_str();
    app->add_option("--b", r.domain.b, "Rectangle height")->capture_default_str();
    app->add_option("--radius", r.domain.radius, "Disk or sector radius")->capture_default_str();
    app->add_option("--opening", r.domain.opening, "Sector opening angle (radians)")->capture_default_str();
    app->add_option("--area", r.domain.area, "Hexagon area")->capture_default_str();
    app->add_option("--n", r.domain.n, "Resolution: cells on the short side, rings, or hexagon steps")
        ->capture_default_str();
    app->add_option("--refine", r.domain.refine, "Extra uniform refinements")->capture_default_str();
    app->add_option("--base", r.domain.base, "Vertices on the first ring of disk and sector meshes")
        ->capture_default_str();
    app->add_option("--diagonal", r.domain.diagonal, "Square and rectangle cell split: fixed | alternating")
        ->capture_default_str();
    app->add_option("--mesh-file", r.domain.file, "Mesh file for --domain file");
}

void add_operator(CLI::App* app, Run& r) {
    app->add_option("--potential", r.potential, "Constant potential V")->capture_default_str();
    app->add_option("--potential-file", r.potential_file, "Per-vertex potential values");
    app->add_option("--zero-tol", r.zero_tol, "Relative zero threshold for signs")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    Run r;
    CLI::App app{"Spectral minimal partitions: meshes, spectra, nodal domains and partition optimization"};
    app.set_version_flag("--version", MINPART_VERSION);
    app.set_config("--config", "", "Read options from a key = value file with [subcommand] sections");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    auto* mesh = app.add_subcommand("mesh", "Build a mesh and write mesh.txt");
    add_common(mesh, r);
    add_domain(mesh, r);

    auto* spectrum = app.add_subcommand("spectrum", "Lowest eigenpairs of -Laplace + V");
    add_common(spectrum, r);
    add_domain(spectrum, r);
    add_operator(spectrum, r);
    spectrum->add_option("--count", r.count, "Number of eigenpairs")->capture_default_str();
    spectrum->add_flag("--mixed", r.mixed, "Honor Neumann markers (only Dirichlet edges clamped)");
    spectrum->add_option("--tol", r.tol, "Eigen residual tolerance")->capture_default_str();

    auto* nodal = app.add_subcommand("nodal", "Nodal domains, nodal set and partition graph of an eigenfunction");
    add_common(nodal, r);
    add_domain(nodal, r);
    add_operator(nodal, r);
    nodal->add_option("--index", r.index, "Eigenfunction index (1-based)")->capture_default_str();
    nodal->add_flag("--mixed", r.mixed, "Honor Neumann markers");
    nodal->add_option("--tol", r.tol, "Eigen residual tolerance")->capture_default_str();

    auto* partition = app.add_subcommand("partition", "Optimize a spectral k-partition");
    add_common(partition, r);
    add_domain(partition, r);
    add_operator(partition, r);
    partition->add_option("--k", r.k, "Number of parts")->capture_default_str();
    partition->add_option("--p-schedule", r.p_schedule, "Comma-separated increasing exponents ending in inf")
        ->capture_default_str();
    partition->add_option("--seed-kind", r.seed_kind, "voronoi | sectors | strips | file")->capture_default_str();
    partition->add_option("--seed-file", r.seed_file, "Vertex labels for --seed-kind file");
    partition->add_option("--draws", r.draws, "Voronoi draws (best final objective wins)")->capture_default_str();
    partition->add_option("--seed", r.seed, "Random seed")->capture_default_str();
    partition->add_option("--iter-cap", r.iter_cap, "Iteration cap per exponent")->capture_default_str();
    partition->add_option("--stall-tol", r.stall_tol, "Relative objective decrease that counts as stalled")
        ->capture_default_str();
    partition->add_option("--levels", r.levels, "Mesh levels, coarsest at n / 2^(levels-1)")->capture_default_str();
    partition->add_option("--method", r.method, "optimize | dn (symmetric Dirichlet-Neumann candidate, k = 3)")
        ->capture_default_str();

    auto* classify = app.add_subcommand("classify", "Courant-sharp product modes of a rectangle, or of the disk");
    add_common(classify, r);
    classify->add_option("--rect-ratio", r.rect_ratio, "Side ratio parameter of the rectangle")
        ->capture_default_str();
    classify->add_option("--max-index", r.max_index, "Largest m and n to test")->capture_default_str();
    classify->add_flag("--disk", r.disk, "Classify disk modes instead");

    auto* bounds = app.add_subcommand("bounds", "Faber-Krahn floor, hexagonal rate, sandwich and Courant checks");
    add_common(bounds, r);
    add_domain(bounds, r);
    add_operator(bounds, r);
    bounds->add_option("--k", r.k, "Number of parts")->capture_default_str();
    bounds->add_option("--lambda", r.lambda, "Computed partition energy to place in the sandwich");
    bounds->add_option("--n-max", r.n_max, "Spectrum length for Pleijel ratios")->capture_default_str();
    bounds->add_option("--hexagon-n", r.hexagon_n, "Hexagon mesh resolution")->capture_default_str();

    auto* bessel = app.add_subcommand("bessel", "Zeros and values of Bessel functions J");
    add_common(bessel, r);
    bessel->add_option("--order", r.order, "Order (0 to 20)")->capture_default_str();
    bessel->add_option("--count", r.count, "Number of zeros")->capture_default_str();
    bessel->add_option("--x", r.xs, "Points at which to evaluate J");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        validate(r.domain);
        thread_count();
        if (*mesh) return cmd_mesh(r);
        if (*spectrum) return cmd_spectrum(r);
        if (*nodal) return cmd_nodal(r);
        if (*partition) return cmd_partition(r);
        if (*classify) return cmd_classify(r);
        if (*bounds) return cmd_bounds(r);
        return cmd_bessel(r);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const ConstructionFailure& e) {
        std::cerr << "construction failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
