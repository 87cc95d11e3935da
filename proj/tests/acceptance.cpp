// Acceptance suite: end-to-end checks of the library's structural
// guarantees, one pass/fail line per criterion. Exits nonzero if any fails.
#include "helpers.hpp"

#include <chrono>
#include <iostream>

using namespace devim;
using namespace fixtures;

namespace {

int failures = 0;

struct Criterion {
    std::string name;
    std::chrono::steady_clock::time_point start;
    bool ok = true;
    std::string detail;

    explicit Criterion(std::string n) : name(std::move(n)), start(std::chrono::steady_clock::now()) {}

    void expect(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }

    ~Criterion()
    {
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), secs,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

Vec s1(double v)
{
    Vec s(1);
    s << v;
    return s;
}

DevelopableImmersion build_simple(const CurvatureProfile& prof, const ConvexDomain& dom,
                                  const Vec& g0, double step = 1e-3)
{
    FramedCurve fc = integrate_domain_frame(prof, g0, Mat::Identity(prof.dim(), prof.dim()), step);
    Vec y0;
    Mat G0;
    default_target_seed(fc, y0, G0);
    integrate_darboux_frame(fc, y0, G0);
    return DevelopableImmersion(std::move(fc), dom);
}

void criterion_gradient_energy()
{
    Criterion c("1. gradient-energy identity: ||grad u||^2 / |Omega(gamma)| = n (rel 1e-6)");
    struct Case {
        const char* tag;
        DevelopableImmersion imm;
    };
    std::vector<Case> cases;
    cases.push_back({"flat n=2", flat2()});
    cases.push_back({"cylinder n=2", cylinder2()});
    cases.push_back({"arc lead n=2", arc2(2.0, 0.8, 0.42, constant_fn(0.5))});
    {
        CurvatureProfile prof(3, 1.5, 2.0, {constant_fn(0.0), constant_fn(0.0)},
                              {constant_fn(0.0)}, constant_fn(0.0));
        Vec g0(3);
        g0 << -0.75, 0, 0;
        cases.push_back({"flat n=3", build_simple(prof, ConvexDomain::ball(Vec::Zero(3), 0.8), g0)});
    }
    cases.push_back({"cylinder n=3", cylinder3()});
    for (auto& cs : cases) {
        auto norms = cs.imm.sobolev_norms();
        double ratio = norms.grad_sq / norms.volume;
        double n = cs.imm.dim();
        c.expect(std::abs(ratio - n) <= 1e-6 * n,
                 std::string(cs.tag) + ": ratio " + std::to_string(ratio));
    }
}

void criterion_jacobian_formula()
{
    Criterion c("2. analytic Jacobian matches finite-difference det DPhi (1e-4, 10^3 points)");
    auto arc = arc2(2.5, 0.8, 0.42, [](double t) { return 0.3 + 0.2 * std::sin(3 * t); });

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ut(0.05, 0.75), us(-1.0, 1.0);
    const double delta = 1e-5;
    int done = 0;
    double worst = 0;
    while (done < 1000) {
        double t = ut(rng);
        Vec dir = s1(us(rng) >= 0 ? 1.0 : -1.0);
        double S = arc.boundary_extent(t, dir);
        Vec s = s1(std::abs(us(rng)) * 0.9 * S * dir[0]);
        if (!arc.domain().contains(arc.phi(t, s))) continue;
        if (t - delta < 0 || t + delta > arc.length()) continue;
        ++done;

        Mat D(2, 2);
        D.col(0) = (arc.phi(t + delta, s) - arc.phi(t - delta, s)) / (2 * delta);
        D.col(1) = arc.curve().frame(t).row(1).transpose();
        worst = std::max(worst, std::abs(D.determinant() - arc.jacobian(t, s)));
    }
    c.expect(worst <= 1e-4, "max |det - J| = " + std::to_string(worst));
}

void criterion_sharp_ruling()
{
    Criterion c("3. sharp ruling bound: circular lead curve has L kappa = 1 (1e-6)");
    for (double R : {1.0, 2.0, 5.0}) {
        auto arc = arc2(R, 0.4 * R, 0.2 * R);
        auto rd = arc.ruling_distances(0.2 * R, s1(1.0));
        c.expect(std::abs(rd.L / R - 1.0) <= 1e-6,
                 "R = " + std::to_string(R) + ": L kappa = " + std::to_string(rd.L / R));
    }
}

// shared by criteria 4 and 5
SmoothingResult pipeline_result()
{
    static SmoothingResult res = [] {
        SmoothingConfig cfg;
        cfg.schedule = {4, 8, 16, 32};
        return run_smoothing(cylinder_corner(), cfg);
    }();
    return res;
}

void criterion_smoothing_pipeline()
{
    Criterion c("4. smoothing pipeline: stage inequalities, Jacobian floor, W22 decrease");
    try {
        auto res = pipeline_result();
        for (const auto& [rec, um] : res.stages) {
            c.expect(rec.step5_margin <= 1.0 + 1e-9,
                     "m=" + std::to_string(rec.m) + " curvature inequality");
            c.expect(rec.jacobian_floor >= rec.required_floor - 1e-9,
                     "m=" + std::to_string(rec.m) + " Jacobian floor");
        }
        c.expect(res.report.strictly_decreasing, "W22 errors not strictly decreasing");
        double ratio = res.report.rows.back().total() / res.report.rows.front().total();
        c.expect(ratio < 0.25, "error(32)/error(4) = " + std::to_string(ratio));
    } catch (const Error& e) {
        c.expect(false, e.what());
    }
}

void criterion_isometry_rank1()
{
    Criterion c("5. stage maps: isometry residual <= 1e-8, 2x2 minors of A <= 1e-10");
    try {
        auto res = pipeline_result();
        for (const auto& [rec, um] : res.stages) {
            auto rep = um.validate(129, 2, 16, 512);
            c.expect(rep.max_isometry_residual <= 1e-8,
                     "m=" + std::to_string(rec.m) + " residual");
            double worst_minor = 0;
            for (int i = 0; i <= 32; ++i) {
                double t = um.length() * i / 32.0;
                for (double dirsgn : {1.0, -1.0}) {
                    double S = um.boundary_extent(t, s1(dirsgn));
                    for (int r = 0; r < 8; ++r) {
                        Vec s = s1(dirsgn * S * (r + 0.5) / 8.0);
                        Mat A = um.second_fundamental_form(t, s);
                        worst_minor = std::max(
                            worst_minor, std::abs(A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0)));
                    }
                }
            }
            c.expect(worst_minor <= 1e-10, "m=" + std::to_string(rec.m) + " minor");
        }
    } catch (const Error& e) {
        c.expect(false, e.what());
    }
}

void criterion_developability_recovery()
{
    Criterion c("6. analyzer recovers rulings (2e-2 rad) and the flat body at h = 5e-3");
    auto analyze = [](const SampledMap& m) {
        auto fe = estimate_fields(m);
        auto rf = isometry_residual(m, fe);
        auto nf = normal_field(m, fe);
        auto sf = second_form_field(m, fe, nf);
        return std::make_pair(detect_rulings(m, fe, rf, sf), std::move(fe));
    };

    {
        SampledMap m = disc_samples(5e-3, 0.9, cylinder_map);
        auto [rp, fe] = analyze(m);
        double worst = 0;
        long ruled = 0;
        for (long s = 0; s < m.node_count; ++s)
            if (rp.label[s] == NodeLabel::ruled) {
                ++ruled;
                Eigen::Map<const Vec> v(rp.direction.data() + s * 2, 2);
                worst = std::max(worst, std::acos(std::min(1.0, std::abs(v[0]))));
            }
        c.expect(ruled > 1000 && worst <= 2e-2,
                 "cylinder rulings: " + std::to_string(worst) + " rad");
    }
    {
        SampledMap m = annulus_samples(5e-3, 0.2, 0.9, cone_map);
        auto [rp, fe] = analyze(m);
        double worst = 0;
        long ruled = 0;
        m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
            if (rp.label[s] != NodeLabel::ruled) return;
            Vec x = m.coord(idx);
            if (x.norm() < 0.3) return;
            ++ruled;
            Eigen::Map<const Vec> v(rp.direction.data() + s * 2, 2);
            Vec radial = x / x.norm();
            Vec tangential(2);
            tangential << -radial[1], radial[0];
            worst = std::max(worst,
                             std::acos(std::min(1.0, std::abs(v.dot(tangential)))));
        });
        c.expect(ruled > 1000 && worst <= 2e-2,
                 "cone ruling directions: " + std::to_string(worst) + " rad");
    }
    {
        auto id = [](const Vec& x) -> Vec {
            Vec u(3);
            u << x[0], x[1], 0.0;
            return u;
        };
        SampledMap m = disc_samples(5e-3, 0.9, id);
        auto [rp, fe] = analyze(m);
        c.expect(rp.bodies.size() == 1 && rp.planes.empty(),
                 "flat map bodies = " + std::to_string(rp.bodies.size()));
    }
}

void criterion_sharpness()
{
    Criterion c("7. critical exponent: p = 1.5 converges, p = 2 diverges, vs shell oracle");
    SampledMap m = disc_samples(2.5e-3, 1.0, cone_map);
    auto fe = estimate_fields(m);
    Vec apex = Vec::Zero(2);

    auto pr15 = sharpness_probe(m, fe, apex, 1.5, {0.78, 0.312, 0.1248, 0.04992});
    c.expect(pr15.verdict == "converges", "p=1.5 verdict " + pr15.verdict);
    double oracle = std::pow(2.5, -0.5); // increment ratio of int r^{1-p} dr per 1/2.5 step
    for (double r : pr15.ratios) {
        c.expect(r < 0.7, "p=1.5 ratio " + std::to_string(r));
        c.expect(std::abs(r - oracle) <= 0.05 * oracle, "p=1.5 oracle mismatch");
    }

    auto pr20 = sharpness_probe(m, fe, apex, 2.0, {0.8, 0.4, 0.2, 0.1, 0.05});
    c.expect(pr20.verdict == "diverges", "p=2 verdict " + pr20.verdict);
    double mean = 0;
    for (double d : pr20.increments) mean += d;
    mean /= double(pr20.increments.size());
    for (double d : pr20.increments)
        c.expect(std::abs(d - mean) <= 0.2 * mean, "p=2 increments not constant");
}

void criterion_frame_accuracy()
{
    Criterion c("8. frame integrator: expm oracle 1e-8 at t=1 (n=2,3,4); drift 1e-9 over l=10");
    for (int n : {2, 3, 4}) {
        std::vector<ScalarFn> front, twist;
        for (int i = 0; i < n - 1; ++i) front.push_back(constant_fn(0.3 + 0.2 * i));
        for (int k = 0; k < CurvatureProfile::twist_count(n); ++k)
            twist.push_back(constant_fn(0.15 * (k + 1)));
        CurvatureProfile p(n, 1.0, 3.0, front, twist, constant_fn(0.0));
        FramedCurve fc = integrate_domain_frame(p, Vec::Zero(n), Mat::Identity(n, n), 1e-3);
        Mat expect = expm_oracle(p.domain_generator(0.0));
        double err = max_abs(fc.frame(1.0) - expect);
        c.expect(err <= 1e-8, "n=" + std::to_string(n) + " err " + std::to_string(err));
    }
    CurvatureProfile p(3, 10.0, 2.0,
                       {[](double t) { return 0.8 * std::sin(t); },
                        [](double t) { return 0.5 * std::cos(2 * t); }},
                       {[](double t) { return 0.4 * std::sin(3 * t); }}, constant_fn(0.0));
    FramedCurve fc = integrate_domain_frame(p, Vec::Zero(3), Mat::Identity(3, 3), 1e-3);
    double drift = 0;
    for (const auto& F : fc.domain.frame) drift = std::max(drift, orthogonality_defect(F));
    c.expect(drift <= 1e-9, "drift " + std::to_string(drift));
}

void criterion_gluing()
{
    Criterion c("9. gluing: jumps <= 1e-8 at both interfaces, motions shrink with m");
    // three bands of a disc of radius 2: cylinder arm, flat body, cylinder arm
    Vec dc(2);
    dc << 1.5, 0.0;
    ConvexDomain dom = ConvexDomain::ball(dc, 2.0);

    auto band = [&](double x0, double x1, ScalarFn kn, const Vec& y0, const Mat& G0) {
        CurvatureProfile prof(2, x1 - x0, 2.0, {constant_fn(0.0)}, {}, std::move(kn));
        Vec g0(2);
        g0 << x0, 0.0;
        FramedCurve fc = integrate_domain_frame(prof, g0, Mat::Identity(2, 2), 1e-3);
        integrate_darboux_frame(fc, y0, G0);
        return DevelopableImmersion(std::move(fc), dom);
    };

    // reference chain: the true end data of each band seeds the next
    CurvatureProfile arm_prof(2, 1.0, 2.0, {constant_fn(0.0)}, {}, constant_fn(1.0));
    FrameTrack ref1 = integrate_darboux_track(arm_prof, Vec::Zero(3), Mat::Identity(3, 3), 1e-3);
    Vec y1 = ref1.point.back();
    Mat G1 = ref1.frame.back();
    CurvatureProfile flat_prof(2, 1.0, 2.0, {constant_fn(0.0)}, {}, constant_fn(0.0));
    FrameTrack ref2 = integrate_darboux_track(flat_prof, y1, G1, 1e-3);
    Vec y2 = ref2.point.back();
    Mat G2 = ref2.frame.back();

    double prev_angle = std::numeric_limits<double>::infinity();
    double prev_shift = std::numeric_limits<double>::infinity();
    for (int m : {4, 8, 16, 32}) {
        ScalarFn cut = endpoint_cutoff(constant_fn(1.0), m, 1.0);
        auto p1 = band(0, 1, cut, Vec::Zero(3), Mat::Identity(3, 3));
        auto p2 = band(1, 2, constant_fn(0.0), y1, G1);
        auto p3 = band(2, 3, cut, y2, G2);
        auto chain = glue_arms({p1, p2, p3});
        for (const auto& ir : chain.interfaces) {
            c.expect(ir.value_jump <= 1e-8, "m=" + std::to_string(m) + " value jump");
            c.expect(ir.gradient_jump <= 1e-8, "m=" + std::to_string(m) + " gradient jump");
        }
        double angle = 0, shift = 0;
        for (const auto& ir : chain.interfaces) {
            angle = std::max(angle, ir.motion.rotation_angle());
            shift = std::max(shift, ir.motion.translation_norm());
        }
        c.expect(angle < prev_angle,
                 "m=" + std::to_string(m) + " rotation angle " + std::to_string(angle));
        c.expect(shift < prev_shift,
                 "m=" + std::to_string(m) + " translation " + std::to_string(shift));
        prev_angle = angle;
        prev_shift = shift;
    }
}

} // namespace

int main()
{
    criterion_gradient_energy();
    criterion_jacobian_formula();
    criterion_sharp_ruling();
    criterion_smoothing_pipeline();
    criterion_isometry_rank1();
    criterion_developability_recovery();
    criterion_sharpness();
    criterion_frame_accuracy();
    criterion_gluing();
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
