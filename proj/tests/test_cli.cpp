#include <catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using Catch::Approx;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr discarded and returns its exit code and stdout.
Result run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" MINPART_CLI "' " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    char buf[4096];
    for (size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh scratch directory under the system temp dir.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("minpart_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("version and help") {
    const auto v = run("--version");
    CHECK(v.code == 0);
    CHECK_FALSE(v.out.empty());
    for (const char* sub : {"mesh", "spectrum", "nodal", "partition", "classify", "bounds", "bessel"}) {
        CHECK(run(std::string(sub) + " --help").code == 0);
        CHECK(run(std::string(sub) + " --version").out == v.out);
    }
}

TEST_CASE("bessel zeros") {
    const fs::path dir = scratch("bessel");
    const auto r = run("bessel --order 0 --count 4 --out " + dir.string());
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,zero");
    const double expected[] = {2.40, 5.52, 8.65, 11.79};
    for (double e : expected) {
        REQUIRE(std::getline(in, line));
        CHECK(std::stod(line.substr(line.find(',') + 1)) == Approx(e).margin(0.01));
    }
    CHECK(fs::exists(dir / "bessel.csv"));
}

TEST_CASE("rectangle classification") {
    const auto r = run("classify --rect-ratio 1.62 --out " + scratch("classify").string());
    REQUIRE(r.code == 0);
    for (const char* mode : {"(1,1)", "(1,2)", "(2,2)", "(2,3)"}) CHECK(r.out.find(mode) != std::string::npos);
    CHECK(r.out.find("(1,3)") == std::string::npos);
}

TEST_CASE("two-partition of the square") {
    const fs::path dir = scratch("partition");
    REQUIRE(run("partition --domain square --k 2 --n 64 --out " + dir.string()).code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["objective"].get<double>() == Approx(49.348).epsilon(0.03));
    for (const char* key : {"part_values", "equalization_gap", "i1_residual", "i2_residual", "bipartite", "graph",
                            "iterations", "converged"})
        CHECK(j.contains(key));
    for (const char* file : {"labeling.csv", "field_1.csv", "field_2.csv", "nodal_set.csv"}) CHECK(fs::exists(dir / file));
}

TEST_CASE("identical runs give identical reports") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const std::string args = "partition --k 3 --n 16 --levels 1 --seed 11 --out ";
    REQUIRE(run(args + a.string()).code == 0);
    REQUIRE(run(args + b.string(), "MINPART_THREADS=2").code == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "labeling.csv") == slurp(b / "labeling.csv"));
}

TEST_CASE("other subcommands write their outputs") {
    const fs::path dir = scratch("misc");
    CHECK(run("mesh --domain disk --n 4 --out " + dir.string()).code == 0);
    CHECK(fs::exists(dir / "mesh.txt"));
    CHECK(run("spectrum --n 8 --count 4 --vtk --out " + dir.string()).code == 0);
    CHECK(fs::exists(dir / "fields.vtk"));
    CHECK(run("nodal --n 16 --index 4 --diagonal alternating --out " + dir.string()).code == 0);
    const auto nodal = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(fs::exists(dir / "nodal_set.csv"));
    CHECK(nodal.dump().find("\"nodal_count\":4") != std::string::npos);
    CHECK(run("bounds --domain disk --n 8 --k 3 --out " + dir.string()).code == 0);
    CHECK(fs::exists(dir / "pleijel.csv"));
}

TEST_CASE("config files") {
    const fs::path dir = scratch("config");
    std::ofstream(dir / "good.ini") << "[partition]\nk = 2\nn = 8\nlevels = 1\n";
    CHECK(run("--config " + (dir / "good.ini").string() + " partition --out " + dir.string()).code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["k"] == 2);
    // Flags override file values.
    CHECK(run("--config " + (dir / "good.ini").string() + " partition --k 3 --out " + dir.string()).code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "report.json"))["k"] == 3);

    std::ofstream(dir / "bad.ini") << "[partition]\nkk = 3\n";
    CHECK(run("--config " + (dir / "bad.ini").string() + " partition --out " + dir.string()).code == 1);
}

TEST_CASE("exit codes") {
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("partition --k 0").code == 1);
    CHECK(run("partition --bogus").code == 1);
    CHECK(run("partition --p-schedule 1,2").code == 1);
    CHECK(run("spectrum --domain file --mesh-file /nonexistent/mesh.txt").code == 1);
    CHECK(run("spectrum --domain blob").code == 1);
    CHECK(run("bessel --order 30").code == 1);
    CHECK(run("spectrum --n 4", "MINPART_THREADS=zero").code == 1);
    // An unreachable residual tolerance is a solver failure.
    CHECK(run("spectrum --n 8 --tol 1e-300 --out " + scratch("fail").string()).code == 2);
}
