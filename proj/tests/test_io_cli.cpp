#include "helpers.hpp"

#include <devim/cli.hpp>

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace devim;
namespace fs = std::filesystem;

namespace {

std::string sandbox()
{
    static int counter = 0;
    auto dir = fs::temp_directory_path() / ("devim_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter++));
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path)
{
    std::ifstream is(path);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text)
{
    std::ofstream os(path);
    os << text;
}

int run_cli(const std::string& args, const std::string& errfile = "")
{
    std::string cmd = std::string(DEVIM_CLI_PATH) + " " + args;
    if (!errfile.empty()) cmd += " 2> " + errfile;
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

const char* cylinder_cfg = R"(
[domain]
shape = disc
center = 0 0
radius = 1.0

[curve]
dim = 2
length = 1.5
step = 1e-3
origin = -0.75 0
kappan = const 1.0

[build]
validate_t = 65
validate_dirs = 2
obj = surface.obj
fields = fields.csv
lattice = lattice.csv
lattice_h = 0.01
)";

} // namespace

TEST_CASE("seventeen-digit formatting round-trips")
{
    for (double v : {M_PI, 1.0 / 3.0, 1e-17, -2.5e300, 0.1 + 0.2})
        CHECK(std::stod(fmt17(v)) == v);
}

TEST_CASE("profile tables round-trip")
{
    CurvatureProfile p(3, 2.0, 2.0,
                       {[](double t) { return std::sin(t); }, constant_fn(0.25)},
                       {[](double t) { return 0.1 * t; }},
                       [](double t) { return std::cos(t); });
    std::string dir = sandbox();
    write_profile_csv(p, dir + "/prof.csv", 513);
    CurvatureProfile q = read_profile_csv(dir + "/prof.csv");
    CHECK(q.dim() == 3);
    CHECK(q.length() == doctest::Approx(2.0));
    for (int k = 0; k <= 512; ++k) {
        double t = 2.0 * k / 512; // the sample times themselves
        CHECK(q.front(0, t) == doctest::Approx(p.front(0, t)).epsilon(1e-12));
        CHECK(q.twist(0, 1, t) == doctest::Approx(p.twist(0, 1, t)).epsilon(1e-12));
        CHECK(q.normal_curvature(t) == doctest::Approx(p.normal_curvature(t)).epsilon(1e-12));
    }
}

TEST_CASE("lattice tables round-trip")
{
    SampledMap m = fixtures::disc_samples(0.05, 0.4, fixtures::cylinder_map);
    std::string dir = sandbox();
    write_lattice_csv(m, dir + "/lat.csv");
    SampledMap r = read_lattice_csv(dir + "/lat.csv");
    CHECK(r.n == m.n);
    CHECK(r.h == doctest::Approx(m.h).epsilon(1e-12));
    CHECK(r.node_count == m.node_count);
    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        Vec x = m.coord(idx);
        // locate in r
        std::vector<int> ridx(2);
        for (int d = 0; d < 2; ++d) ridx[d] = int(std::llround((x[d] - r.origin[d]) / r.h));
        int32_t rs = r.slot_at(ridx);
        REQUIRE(rs >= 0);
        CHECK((r.value(rs) - m.value(s)).norm() == 0.0);
    });
}

TEST_CASE("scalar component specs")
{
    auto lin = scalar_from_spec("linear 0.5 2.0", "k");
    CHECK(lin(0.25) == doctest::Approx(1.0));
    auto sn = scalar_from_spec("sin 2.0 3.0", "k");
    CHECK(sn(0.4) == doctest::Approx(2.0 * std::sin(1.2)));
    auto bp = scalar_from_spec("bump 0.7 1.0 0.5", "k");
    CHECK(bp(1.0) == doctest::Approx(0.7)); // peaks at the center
    CHECK(bp(1.5) == 0.0);
    CHECK(bp(0.4) == 0.0);
    auto tb = scalar_from_spec("table 0 1 1 3", "k");
    CHECK(tb(0.5) == doctest::Approx(2.0));
    CHECK_THROWS_AS(scalar_from_spec("wavelet 1 2", "k"), Error);
    CHECK_THROWS_AS(scalar_from_spec("const", "k"), Error);
}

TEST_CASE("cli build from a profile table")
{
    std::string dir = sandbox();
    // write the cylinder profile as a CSV table and reference it
    CurvatureProfile p(2, 1.5, 2.0, {constant_fn(0.0)}, {}, constant_fn(1.0));
    write_profile_csv(p, dir + "/prof.csv", 257);
    spit(dir + "/job.ini",
         "[domain]\nshape = disc\ncenter = 0 0\nradius = 1\n"
         "[curve]\nprofile_csv = " + dir + "/prof.csv\norigin = -0.75 0\nstep = 1e-3\n"
         "[build]\nvalidate_t = 33\nvalidate_dirs = 2\n");
    CHECK(run_cli("build --config " + dir + "/job.ini --out " + dir + "/out") == 0);
    std::string report = slurp(dir + "/out/report.txt");
    CHECK(report.find("overall: pass") != std::string::npos);

    // missing table path is a parse error at config time
    spit(dir + "/bad.ini",
         "[domain]\nshape = disc\ncenter = 0 0\nradius = 1\n"
         "[curve]\nprofile_csv = " + dir + "/absent.csv\n");
    CHECK(run_cli("build --config " + dir + "/bad.ini --out " + dir + "/bout",
                  dir + "/err.txt") == 4);
}

TEST_CASE("config parser")
{
    Config cfg = Config::parse("[a]\nx = 1.5  # comment\nname = hello\n[b]\nflag = true\n");
    CHECK(cfg.get_double("a", "x") == 1.5);
    CHECK(cfg.get("a", "name") == "hello");
    CHECK(cfg.get_bool("b", "flag", false));
    CHECK(cfg.get_double("b", "missing", 7.0) == 7.0);
    CHECK_THROWS_AS(cfg.get("a", "absent"), Error);
    CHECK_THROWS_AS(Config::parse("[a\nx=1\n"), Error);
    CHECK_THROWS_AS(cfg.get_double("a", "name"), Error);
}

TEST_CASE("cli build: cylinder produces a valid surface")
{
    std::string dir = sandbox();
    spit(dir + "/job.ini", cylinder_cfg);
    int rc = run_cli("build --config " + dir + "/job.ini --out " + dir + "/out");
    CHECK(rc == 0);
    CHECK(fs::exists(dir + "/out/curve.csv"));
    CHECK(fs::exists(dir + "/out/report.txt"));
    CHECK(fs::exists(dir + "/out/fields.csv"));
    CHECK(fs::exists(dir + "/out/lattice.csv"));
    std::string report = slurp(dir + "/out/report.txt");
    CHECK(report.find("overall: pass") != std::string::npos);

    // OBJ vertices lie on a unit cylinder; the axis passes through
    // gamma~(0) = (-0.75, 0, 0), so (x + 0.75)^2 + (z - 1)^2 = 1
    std::ifstream obj(dir + "/out/surface.obj");
    REQUIRE(obj.good());
    std::string tok;
    int checked = 0;
    bool any_face = false;
    while (obj >> tok) {
        if (tok == "v") {
            double x, y, z;
            obj >> x >> y >> z;
            CHECK(std::abs((x + 0.75) * (x + 0.75) + (z - 1) * (z - 1) - 1.0) < 1e-9);
            ++checked;
        } else if (tok == "f") {
            any_face = true;
            obj.ignore(256, '\n');
        }
    }
    CHECK(checked > 100);
    CHECK(any_face);
}

TEST_CASE("cli build: flat map reports zero bending energy")
{
    std::string dir = sandbox();
    spit(dir + "/job.ini",
         "[domain]\nshape = disc\ncenter = 0 0\nradius = 1\n"
         "[curve]\ndim = 2\nlength = 1.5\nstep = 1e-3\norigin = -0.75 0\n"
         "[build]\nvalidate_t = 33\nvalidate_dirs = 2\n");
    int rc = run_cli("build --config " + dir + "/job.ini --out " + dir + "/out");
    CHECK(rc == 0);
    std::string report = slurp(dir + "/out/report.txt");
    CHECK(report.find("hess_l2_sq = 0\n") != std::string::npos);
}

TEST_CASE("cli build: jacobian violation exits 2 with a witness")
{
    std::string dir = sandbox();
    spit(dir + "/job.ini",
         "[domain]\nshape = disc\ncenter = 0.5646424733950354 0.17466438509032167\nradius = 1.05\n"
         "[curve]\ndim = 2\nlength = 1.2\nstep = 1e-3\norigin = 0 0\nkappa1 = const 1.0\n"
         "[build]\nvalidate_t = 65\nvalidate_dirs = 2\n");
    int rc = run_cli("build --config " + dir + "/job.ini --out " + dir + "/out",
                     dir + "/err.txt");
    CHECK(rc == 2);
    std::string err = slurp(dir + "/err.txt");
    CHECK(err.find("jacobian witness") != std::string::npos);
}

TEST_CASE("cli exit codes: margin violation and parse errors")
{
    std::string dir = sandbox();
    // fronts of this arc cross inside the oversized disc
    spit(dir + "/margin.ini",
         "[domain]\nshape = disc\ncenter = 0.5646424733950354 0.17466438509032167\nradius = 1.05\n"
         "[curve]\ndim = 2\nlength = 1.2\nstep = 1e-3\norigin = 0 0\nkappa1 = const 1.0\n"
         "[smooth]\nschedule = 4\n");
    CHECK(run_cli("smooth --config " + dir + "/margin.ini --out " + dir + "/m_out",
                  dir + "/err1.txt") == 3);

    spit(dir + "/bad.ini", "[domain\nshape = disc\n");
    CHECK(run_cli("build --config " + dir + "/bad.ini --out " + dir + "/b_out",
                  dir + "/err2.txt") == 4);

    CHECK(run_cli("build --config " + dir + "/nonexistent.ini --out " + dir + "/c_out",
                  dir + "/err3.txt") == 4);
}

TEST_CASE("cli smooth: stage outputs and window collapse")
{
    std::string dir = sandbox();
    std::string cfg =
        "[domain]\nshape = disc\ncenter = 0 0\nradius = 1\n"
        "[curve]\ndim = 2\nlength = 1.5\nstep = 2e-3\norigin = -0.75 0\n"
        "kappan = step 0.75 0 1\n"
        "[smooth]\nschedule = 4 8\nquad_t = 16\nquad_t_panels = 8\nquad_s = 16\n"
        "mc_samples = 2000\n";
    spit(dir + "/job.ini", cfg);
    int rc = run_cli("smooth --config " + dir + "/job.ini --out " + dir + "/out");
    CHECK(rc == 0);
    CHECK(fs::exists(dir + "/out/m_0004/lambda.csv"));
    CHECK(fs::exists(dir + "/out/m_0004/profile_mollified.csv"));
    CHECK(fs::exists(dir + "/out/m_0008/stage.txt"));
    CHECK(fs::exists(dir + "/out/convergence.csv"));
    {
        CsvTable ver = read_csv(dir + "/out/m_0004/verification.csv");
        int pc = ver.column("margin_product");
        REQUIRE(pc >= 0);
        double worst = 0;
        for (const auto& row : ver.rows) worst = std::max(worst, row[pc]);
        CHECK(worst <= 1.0 + 1e-9);
    }
    CsvTable conv = read_csv(dir + "/out/convergence.csv");
    REQUIRE(conv.rows.size() == 2);
    int c = conv.column("err_total");
    CHECK(conv.rows[1][c] < conv.rows[0][c]);
    std::string summary = slurp(dir + "/out/summary.txt");
    CHECK(summary.find("error_strictly_decreasing = yes") != std::string::npos);

    // m = 1 collapses the cutoff windows on this curve (ell* <= 2)
    spit(dir + "/job1.ini",
         "[domain]\nshape = disc\ncenter = 0 0\nradius = 1\n"
         "[curve]\ndim = 2\nlength = 1.5\nstep = 2e-3\norigin = -0.75 0\n"
         "kappan = step 0.75 0 1\n"
         "[smooth]\nschedule = 1\n");
    int rc1 = run_cli("smooth --config " + dir + "/job1.ini --out " + dir + "/out1",
                      dir + "/err.txt");
    CHECK(rc1 == 2);
    CHECK(slurp(dir + "/err.txt").find("window-collapsed") != std::string::npos);
}

TEST_CASE("cli analyze: cylinder lattice and probe")
{
    std::string dir = sandbox();
    SampledMap m = fixtures::disc_samples(1e-2, 0.9, fixtures::cylinder_map);
    write_lattice_csv(m, dir + "/samples.csv");
    SampledMap cone = fixtures::disc_samples(5e-3, 1.0, fixtures::cone_map);
    write_lattice_csv(cone, dir + "/cone.csv");

    spit(dir + "/job.ini", "[analyze]\ninput = " + dir + "/samples.csv\n");
    CHECK(run_cli("analyze --config " + dir + "/job.ini --out " + dir + "/out") == 0);
    std::string part = slurp(dir + "/out/partition.txt");
    CHECK(part.find("ruled_clusters = 1") != std::string::npos);
    CHECK(fs::exists(dir + "/out/labels.csv"));

    spit(dir + "/probe.ini", "[analyze]\ninput = " + dir + "/cone.csv\n"
                                 "probe_p = 1.5 2.0\n"
                                 "probe_eps = 0.78 0.312 0.1248 0.04992\n"
                                 "probe_apex = 0 0\n");
    CHECK(run_cli("analyze --config " + dir + "/probe.ini --out " + dir + "/pout") == 0);
    std::string probe = slurp(dir + "/pout/probe.txt");
    CHECK(probe.find("p = 1.5: converges") != std::string::npos);
    CHECK(probe.find("p = 2: diverges") != std::string::npos);

    spit(dir + "/missing.ini", "[analyze]\ninput = " + dir + "/nope.csv\n");
    CHECK(run_cli("analyze --config " + dir + "/missing.ini --out " + dir + "/mout",
                  dir + "/err.txt") == 4);
}

TEST_CASE("cli outputs are byte-identical across runs and thread counts")
{
    std::string dir = sandbox();
    spit(dir + "/job.ini", cylinder_cfg);
    CHECK(run_cli("build --config " + dir + "/job.ini --out " + dir + "/a") == 0);
    CHECK(run_cli("build --config " + dir + "/job.ini --out " + dir + "/b --threads 4") == 0);
    CHECK(slurp(dir + "/a/curve.csv") == slurp(dir + "/b/curve.csv"));
    CHECK(slurp(dir + "/a/report.txt") == slurp(dir + "/b/report.txt"));
    CHECK(slurp(dir + "/a/fields.csv") == slurp(dir + "/b/fields.csv"));
}
