// smoothing.hpp -- the constructive approximation pipeline: from a curvature
// profile with a verified ruling margin rho, build smooth curves and
// immersions stage by stage (mollify, flatten by the sup factor, re-mollify,
// re-integrate, cut the normal curvature off at the ends) and report the
// W^{2,2} distance to the input map along the smoothing schedule. Also the
// rigid-motion gluing of arm/body chains.
#pragma once

#include "core.hpp"
#include "immersion.hpp"

#include <random>

namespace devim {

struct SmoothingConfig {
    std::vector<int> schedule{4, 8, 16, 32};
    double rho = 0;               // <= 0: use the measured margin, capped by diam
    int sphere_grid = 0;          // 0: dimension default (2 for n=2, 256 for n=3)
    double cutoff_steepness = 1.0;
    double step = 1e-3;           // frame integration step
    int verify_radius = 32;       // radius samples per direction on checks
    QuadratureSpec quad{64, 16, 64, 64, 32}; // report quadrature (16 t-panels)
    unsigned seed = 0;            // Monte Carlo seed for the sliver volume
    int mc_samples = 20000;
    int margin_t = 129;           // t samples for margin measurement
    int margin_inner = 1024;      // inner grid cap for L
};

inline int default_sphere_grid(int n, int requested)
{
    if (requested > 0) return requested;
    return n == 2 ? 2 : 256;
}

// inf over a (t, direction) grid of L - S. Unbounded (every L infinite) comes
// back as +infinity.
inline double measure_margin(const DevelopableImmersion& imm, int t_samples = 129,
                             int dirs = 0, int inner_cap = 1024,
                             double* witness_t = nullptr, Vec* witness_dir = nullptr)
{
    auto dgrid = sphere_directions(imm.dim() - 1, default_sphere_grid(imm.dim(), dirs));
    const auto& tr = imm.curve().domain;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t_samples; ++i) {
        int k = int(std::llround(double(i) * tr.cells() / (t_samples - 1)));
        double t = tr.t[std::min(k, tr.cells())];
        for (const auto& dir : dgrid) {
            RulingDistances rd = imm.ruling_distances(t, dir, inner_cap);
            double gap = rd.L - rd.S;
            if (gap < worst) {
                worst = gap;
                if (witness_t) *witness_t = t;
                if (witness_dir) *witness_dir = dir;
            }
        }
    }
    return worst;
}

// The pipeline precondition. Throws margin-violation when the measured gap is
// not positive; otherwise returns it (possibly +infinity for parallel fronts).
inline double margin_check(const DevelopableImmersion& imm, int t_samples = 129,
                           int dirs = 0, int inner_cap = 1024)
{
    double wt = 0;
    Vec wd;
    double rho = measure_margin(imm, t_samples, dirs, inner_cap, &wt, &wd);
    if (!(rho > 0)) {
        std::ostringstream os;
        os << "measured margin " << rho << " at t = " << wt;
        if (wd.size()) os << ", dir = [" << wd.transpose() << "]";
        fail(ErrorKind::margin_violation, os.str());
    }
    return rho;
}

inline double resolve_rho(const DevelopableImmersion& u, const SmoothingConfig& cfg)
{
    double measured = margin_check(u, cfg.margin_t, cfg.sphere_grid, cfg.margin_inner);
    if (cfg.rho > 0) {
        require(cfg.rho <= measured + 1e-12, ErrorKind::margin_violation,
                "supplied rho exceeds the measured margin");
        return cfg.rho;
    }
    return std::min(measured, u.domain().diameter());
}

namespace detail {

// S along the front direction from a stored grid node; zero when the curve
// point has left the domain (the covered set there is empty).
inline double grid_extent(const FrameTrack& tr, int k, const Vec& s_dir, const ConvexDomain& dom)
{
    if (!dom.contains(tr.point[k])) return 0.0;
    Vec w = Vec::Zero(tr.space_dim());
    for (int i = 0; i < s_dir.size(); ++i) w += s_dir[i] * tr.frame[k].row(i + 1).transpose();
    return dom.boundary_distance(tr.point[k], w / w.norm());
}

struct IneqCheck {
    double max_product = 0; // sup over the grid; 0 when no direction has positive sum
    double witness_t = 0;
    Vec witness_dir;
    bool ok() const { return max_product <= 1.0 + 1e-9; }
};

// max over the grid and direction set of (S + slack)(sum s_i kappa_i).
inline IneqCheck curvature_inequality(const FrameTrack& tr, const CurvatureProfile& prof,
                                      double slack, const ConvexDomain& dom,
                                      const std::vector<Vec>& dirs)
{
    IneqCheck c;
    const int nf = prof.dim() - 1;
    std::vector<double> kv(nf);
    for (size_t k = 0; k < tr.t.size(); ++k) {
        for (int i = 0; i < nf; ++i) kv[i] = prof.front(i, tr.t[k]);
        for (const auto& dir : dirs) {
            double ks = 0;
            for (int i = 0; i < nf; ++i) ks += dir[i] * kv[i];
            if (ks <= 0) continue;
            double p = (grid_extent(tr, int(k), dir, dom) + slack) * ks;
            if (p > c.max_product) {
                c.max_product = p;
                c.witness_t = tr.t[k];
                c.witness_dir = dir;
            }
        }
    }
    return c;
}

struct FloorCheck {
    double min_jacobian = std::numeric_limits<double>::infinity();
    double witness_t = 0;
    Vec witness_s;
};

inline FloorCheck jacobian_floor(const FrameTrack& tr, const CurvatureProfile& prof,
                                 const ConvexDomain& dom, const std::vector<Vec>& dirs,
                                 int radius_samples)
{
    FloorCheck c;
    const int nf = prof.dim() - 1;
    std::vector<double> kv(nf);
    for (size_t k = 0; k < tr.t.size(); ++k) {
        for (int i = 0; i < nf; ++i) kv[i] = prof.front(i, tr.t[k]);
        for (const auto& dir : dirs) {
            double ks = 0;
            for (int i = 0; i < nf; ++i) ks += dir[i] * kv[i];
            double S = grid_extent(tr, int(k), dir, dom);
            for (int r = 0; r < radius_samples; ++r) {
                double radius = S * (r + 0.5) / radius_samples;
                double J = 1.0 - radius * ks;
                if (J < c.min_jacobian) {
                    c.min_jacobian = J;
                    c.witness_t = tr.t[k];
                    c.witness_s = radius * dir;
                }
            }
        }
    }
    return c;
}

inline bool track_covers(const FrameTrack& tr, const Vec& x)
{
    double prev = (x - tr.point[0]).dot(tr.frame[0].row(0));
    if (std::abs(prev) < 1e-10) return true;
    for (size_t k = 1; k < tr.t.size(); ++k) {
        double cur = (x - tr.point[k]).dot(tr.frame[k].row(0));
        if (std::abs(cur) < 1e-10 || prev * cur < 0) return true;
        prev = cur;
    }
    return false;
}

} // namespace detail

// lambda(t) = min{1, 1 / sup_{|s|=1} (S(t) + rho/2)(sum s_i kappa_i(t)) },
// the sup taken over a fixed direction grid. Sampled at the curve grid times.
inline std::vector<double> flatten_factor(const FramedCurve& Gamma,
                                          const CurvatureProfile& kappa, double rho,
                                          const ConvexDomain& dom, int sphere_count = 0)
{
    require(rho > 0, ErrorKind::invalid_input, "flatten factor needs rho > 0");
    const int n = Gamma.n;
    auto dirs = sphere_directions(n - 1, default_sphere_grid(n, sphere_count));
    const auto& tr = Gamma.domain;
    std::vector<double> lam(tr.t.size(), 1.0);
    std::vector<double> kv(n - 1);
    for (size_t k = 0; k < tr.t.size(); ++k) {
        for (int i = 0; i < n - 1; ++i) kv[i] = kappa.front(i, tr.t[k]);
        double sup = 0;
        for (const auto& dir : dirs) {
            double ks = 0;
            for (int i = 0; i < n - 1; ++i) ks += dir[i] * kv[i];
            if (ks <= 0) continue;
            sup = std::max(sup, (detail::grid_extent(tr, int(k), dir, dom) + 0.5 * rho) * ks);
        }
        lam[k] = sup > 1.0 ? 1.0 / sup : 1.0;
    }
    return lam;
}

// psi2 from the exp(-1/x) partition: 0 below 1, 1 above 2, and exactly 1/2 at
// 3/2 by symmetry. psi1(x) = psi2(-x).
inline double cutoff_side(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }

inline double cutoff_up(double x)
{
    double a = cutoff_side(x - 1.0), b = cutoff_side(2.0 - x);
    return a == 0 ? 0.0 : a / (a + b);
}

inline double cutoff_down(double x) { return cutoff_up(-x); }

// kappa_n(t) -> psi1(c m (t - ell_star)) psi2(c m t) kappa_n(t): vanishes on
// [0, 1/(cm)] and on [ell_star - 1/(cm), length].
inline ScalarFn endpoint_cutoff(ScalarFn kn, int m, double ell_star, double steepness = 1.0)
{
    require(m >= 1, ErrorKind::invalid_input, "cutoff needs m >= 1");
    require(steepness > 0, ErrorKind::invalid_input, "cutoff steepness must be positive");
    const double rate = steepness * m;
    require(ell_star > 2.0 / rate, ErrorKind::window_collapsed,
            "cutoff windows overlap: ell_star <= 2/m, m too small for this curve");
    return [kn = std::move(kn), rate, ell_star](double t) {
        return cutoff_down(rate * (t - ell_star)) * cutoff_up(rate * t) * kn(t);
    };
}

namespace detail {

// Membership function of the closed covered set of gamma: max of the domain
// level and the two front half-spaces. Convex, <= 0 inside.
inline double covered_level(const Vec& x, const FramedCurve& gamma, const ConvexDomain& dom)
{
    double v = dom.inside_value(x);
    v = std::max(v, -(x - gamma.domain.point.front()).dot(gamma.domain.frame.front().row(0)));
    v = std::max(v, (x - gamma.domain.point.back()).dot(gamma.domain.frame.back().row(0)));
    return v;
}

// Does the (n-2)-plane F_{gamma_m}(t) cap F_gamma(ell) stay clear of the
// closed covered set? (true = empty intersection)
inline bool fronts_clear(double t, const FramedCurve& gm, const FramedCurve& gamma,
                         const ConvexDomain& dom)
{
    const int n = gm.n;
    Vec n1 = gm.domain.frame_at(t).row(0).transpose();
    Vec p1 = gm.domain.point_at(t);
    Vec n2 = gamma.domain.frame.back().row(0).transpose();
    const Vec& p2 = gamma.domain.point.back();

    double dot = n1.dot(n2);
    if (std::abs(dot) > 1.0 - 1e-12) {
        // parallel fronts: they meet only if coincident
        return std::abs((p1 - p2).dot(n2)) > 1e-10;
    }
    Eigen::Matrix2d G;
    G << 1.0, dot, dot, 1.0;
    Eigen::Vector2d c(n1.dot(p1), n2.dot(p2));
    Eigen::Vector2d ab = G.inverse() * c;
    Vec x0 = ab[0] * n1 + ab[1] * n2;

    if (n == 2) return covered_level(x0, gamma, dom) > 1e-10;

    // basis of the intersection directions
    std::vector<Vec> basis;
    for (int i = 0; i < n && int(basis.size()) < n - 2; ++i) {
        Vec v = Vec::Unit(n, i);
        v -= v.dot(n1) * n1;
        Vec n2p = n2 - n2.dot(n1) * n1;
        n2p /= n2p.norm();
        v -= v.dot(n2p) * n2p;
        for (const auto& b : basis) v -= v.dot(b) * b;
        if (v.norm() > 1e-8) basis.push_back(v / v.norm());
    }
    double span = 2.0 * dom.diameter();
    auto line_min = [&](Vec base, const Vec& d) {
        double a = -span, b2 = span;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        auto val = [&](double y) { return covered_level(base + y * d, gamma, dom); };
        double x1 = b2 - g * (b2 - a), x2 = a + g * (b2 - a);
        double f1 = val(x1), f2 = val(x2);
        for (int it = 0; it < 80; ++it) {
            if (f1 > f2) { a = x1; x1 = x2; f1 = f2; x2 = a + g * (b2 - a); f2 = val(x2); }
            else { b2 = x2; x2 = x1; f2 = f1; x1 = b2 - g * (b2 - a); f1 = val(x1); }
        }
        double y = (f1 < f2) ? x1 : x2;
        return std::make_pair(std::min(f1, f2), base + y * d);
    };
    // cyclic golden sweeps over the basis directions (convex objective)
    Vec base = x0;
    double best = covered_level(base, gamma, dom);
    for (int sweep = 0; sweep < 4; ++sweep)
        for (const auto& d : basis) {
            auto [v, p] = line_min(base, d);
            if (v < best) { best = v; base = p; }
        }
    return best > 1e-10;
}

} // namespace detail

// ell if the covered set of gamma sits inside the covered set of gamma_m;
// otherwise sup{ t : F_{gamma_m}(t) does not meet F_gamma(ell) inside the
// closed covered set }, located on the grid and refined by bisection.
inline double compute_ell_star(const FramedCurve& gamma_m, const FramedCurve& gamma,
                               const ConvexDomain& dom)
{
    const int n = gamma.n;
    const double ell = gamma.length();

    // subset test on a sampled covered set
    auto dirs = sphere_directions(n - 1, n == 2 ? 2 : 32);
    const auto& tr = gamma.domain;
    bool subset = true;
    const double fr[] = {0.25, 0.5, 0.75, 0.9, 0.999};
    for (int i = 0; i <= 64 && subset; ++i) {
        int k = int(std::llround(double(i) * tr.cells() / 64.0));
        k = std::min(k, tr.cells());
        for (const auto& dir : dirs) {
            double S = detail::grid_extent(tr, k, dir, dom);
            for (double f : fr) {
                Vec x = tr.point[k];
                for (int j = 0; j < n - 1; ++j)
                    x += f * S * dir[j] * tr.frame[k].row(j + 1).transpose();
                if (!detail::track_covers(gamma_m.domain, x)) { subset = false; break; }
            }
            if (!subset) break;
        }
    }
    if (subset) return ell;

    auto pred = [&](double t) { return detail::fronts_clear(t, gamma_m, gamma, dom); };
    const int grid = 257;
    double lo = -1, hi = -1;
    for (int i = grid - 1; i >= 0; --i) {
        double t = ell * i / (grid - 1);
        if (pred(t)) {
            lo = t;
            hi = (i == grid - 1) ? t : ell * (i + 1) / (grid - 1);
            break;
        }
    }
    if (lo < 0) return 0.0;
    if (lo == hi) return ell;
    for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        (pred(mid) ? lo : hi) = mid;
    }
    return lo;
}

struct SmoothingStageRecord {
    int m = 0;
    double rho = 0;
    int sphere_count = 0;
    CurvatureProfile mollified;     // step 1
    FramedCurve Gamma;              // step 1 curve
    std::vector<double> lambda;     // step 2, at Gamma grid times
    double lambda_jump_rate = 0;    // max adjacent |dlambda| / dt
    CurvatureProfile flattened;     // step 2
    double step1_margin = 0;        // max (S^Gamma + rho/2)(sum s kappa~~)
    double remollify_width = 0;     // step 4
    CurvatureProfile final_profile; // steps 4-5 (fronts smooth, twists from step 1)
    double step4_margin = 0;        // max (S^Gamma + rho/4)(sum s kappa_m)
    FramedCurve gamma_m;            // step 5 curve
    double step5_margin = 0;        // max (S^gamma_m + rho/8)(sum s kappa_m)
    double jacobian_floor = 0;      // step 6 min J on the verification grid
    double required_floor = 0;      // min(rho/16d, 1/2)
    double ell_star = -1;           // set when the immersion is built
    // per-node verification values on the final curve's grid
    std::vector<double> verify_t;
    std::vector<double> verify_product; // max over directions of (S + rho/8) sum
    std::vector<double> verify_minj;    // min J over directions and radii
};

// Domain-side stages: mollify and integrate a trial curve, flatten its
// fronts by the sup factor, re-mollify until the tightened inequality holds,
// integrate the final curve, and verify the margin cascade and the Jacobian
// floor. Throws stage-failure with the violated inequality and its witness.
inline SmoothingStageRecord build_smooth_curve(const DevelopableImmersion& u, double rho,
                                               const SmoothingConfig& cfg, int m)
{
    require(u.domain().smooth_boundary(), ErrorKind::invalid_input,
            "smoothing requires a C1 domain boundary; polytopes are not accepted");
    require(rho > 0, ErrorKind::precondition_violation, "rho must be positive");
    require(m >= 1, ErrorKind::invalid_input, "smoothing index must be >= 1");

    const auto& prof = u.curve().profile;
    const int n = prof.dim();
    SmoothingStageRecord rec;
    rec.m = m;
    rec.rho = rho;
    rec.sphere_count = default_sphere_grid(n, cfg.sphere_grid);
    auto dirs = sphere_directions(n - 1, rec.sphere_count);

    const Vec g0 = u.curve().domain.point[0];
    const Mat F0 = u.curve().domain.frame[0];

    // step 1: mollify and integrate the trial curve
    rec.mollified = mollify_profile(prof, m);
    rec.Gamma = integrate_domain_frame(rec.mollified, g0, F0, cfg.step);

    // step 2: flatten factor and flattened fronts
    rec.lambda = flatten_factor(rec.Gamma, rec.mollified, rho, u.domain(), rec.sphere_count);
    for (size_t k = 1; k < rec.lambda.size(); ++k)
        rec.lambda_jump_rate = std::max(rec.lambda_jump_rate,
                                        std::abs(rec.lambda[k] - rec.lambda[k - 1]) /
                                            (rec.Gamma.domain.t[k] - rec.Gamma.domain.t[k - 1]));
    ScalarFn lam = table_fn(rec.Gamma.domain.t, rec.lambda);
    std::vector<ScalarFn> flat_fronts;
    for (int i = 0; i < n - 1; ++i) {
        ScalarFn ki = rec.mollified.front_fn(i);
        flat_fronts.push_back([lam, ki](double t) { return lam(t) * ki(t); });
    }
    rec.flattened = rec.mollified.with_front(std::move(flat_fronts));

    auto c1 = detail::curvature_inequality(rec.Gamma.domain, rec.flattened, 0.5 * rho,
                                           u.domain(), dirs);
    rec.step1_margin = c1.max_product;
    if (!c1.ok()) {
        std::ostringstream os;
        os << "flattened curvature inequality fails: (S + rho/2) sum = " << c1.max_product
           << " at t = " << c1.witness_t;
        fail(ErrorKind::stage_failure, os.str());
    }

    // step 4: re-mollify the flattened fronts until the rho/4 inequality holds
    double width = std::min(1.0 / (double(m) * m), 0.5 / m);
    bool ok4 = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<ScalarFn> smooth_fronts;
        for (int i = 0; i < n - 1; ++i)
            smooth_fronts.push_back(mollify_fn(rec.flattened.front_fn(i), width, 0.0,
                                               prof.length()));
        CurvatureProfile candidate = rec.flattened.with_front(std::move(smooth_fronts));
        auto c2 = detail::curvature_inequality(rec.Gamma.domain, candidate, 0.25 * rho,
                                               u.domain(), dirs);
        if (c2.ok()) {
            rec.final_profile = candidate;
            rec.remollify_width = width;
            rec.step4_margin = c2.max_product;
            ok4 = true;
            break;
        }
        width *= 0.5;
    }
    if (!ok4)
        fail(ErrorKind::stage_failure,
             "re-mollification cannot satisfy the rho/4 curvature inequality");

    // step 5: integrate the final curve and check the rho/8 inequality
    rec.gamma_m = integrate_domain_frame(rec.final_profile, g0, F0, cfg.step);
    auto c3 = detail::curvature_inequality(rec.gamma_m.domain, rec.final_profile, 0.125 * rho,
                                           u.domain(), dirs);
    rec.step5_margin = c3.max_product;
    if (!c3.ok()) {
        std::ostringstream os;
        os << "final curvature inequality fails: (S + rho/8) sum = " << c3.max_product
           << " at t = " << c3.witness_t;
        fail(ErrorKind::stage_failure, os.str());
    }

    // step 6: Jacobian floor on the covered grid
    rec.required_floor = std::min(rho / (16.0 * u.domain().diameter()), 0.5);
    auto fl = detail::jacobian_floor(rec.gamma_m.domain, rec.final_profile, u.domain(), dirs,
                                     cfg.verify_radius);
    rec.jacobian_floor = fl.min_jacobian;
    if (fl.min_jacobian < rec.required_floor - 1e-9) {
        std::ostringstream os;
        os << "Jacobian floor fails: " << fl.min_jacobian << " < " << rec.required_floor
           << " at t = " << fl.witness_t;
        fail(ErrorKind::stage_failure, os.str());
    }

    // per-node verification table for the stage record
    {
        const auto& tr = rec.gamma_m.domain;
        std::vector<double> kv(n - 1);
        rec.verify_t = tr.t;
        rec.verify_product.assign(tr.t.size(), 0.0);
        rec.verify_minj.assign(tr.t.size(), 1.0);
        for (size_t k = 0; k < tr.t.size(); ++k) {
            for (int i = 0; i < n - 1; ++i) kv[i] = rec.final_profile.front(i, tr.t[k]);
            for (const auto& dir : dirs) {
                double ks = 0;
                for (int i = 0; i < n - 1; ++i) ks += dir[i] * kv[i];
                double S = detail::grid_extent(tr, int(k), dir, u.domain());
                if (ks > 0)
                    rec.verify_product[k] =
                        std::max(rec.verify_product[k], (S + 0.125 * rho) * ks);
                for (int r = 0; r < cfg.verify_radius; ++r)
                    rec.verify_minj[k] = std::min(
                        rec.verify_minj[k], 1.0 - S * (r + 0.5) / cfg.verify_radius * ks);
            }
        }
    }
    return rec;
}

// Cut the normal curvature off at the ends, integrate the Darboux system with
// the input map's initial data, and assemble the stage immersion.
inline DevelopableImmersion build_smooth_immersion(SmoothingStageRecord& rec,
                                                   const DevelopableImmersion& u,
                                                   const SmoothingConfig& cfg)
{
    rec.ell_star = compute_ell_star(rec.gamma_m, u.curve(), u.domain());
    ScalarFn kn = endpoint_cutoff(rec.mollified.normal_fn(), rec.m, rec.ell_star,
                                  cfg.cutoff_steepness);

    FramedCurve fc;
    fc.n = rec.gamma_m.n;
    fc.profile = rec.final_profile.with_normal(std::move(kn));
    fc.domain = rec.gamma_m.domain;
    integrate_darboux_frame(fc, u.curve().target.point[0], u.curve().target.frame[0]);

    DevelopableImmersion um(std::move(fc), u.domain());
    auto rep = um.validate(65, std::min(rec.sphere_count, 16), 16, 512);
    if (!rep.pass())
        fail(ErrorKind::stage_failure, "stage immersion failed validation:\n" + rep.to_text());
    return um;
}

// Pointwise data of a stage map at a physical point, extending affinely
// beyond its covered set with the values frozen at the nearer end.
struct StageEval {
    Vec value;
    Mat grad;
    Mat second_form; // n x n; the full Hessian is normal^l * A
    Vec normal;
    bool extended = false;
};

inline StageEval stage_eval(const DevelopableImmersion& imm, const Vec& x)
{
    StageEval out;
    const int n = imm.dim();
    if (detail::track_covers(imm.curve().domain, x)) {
        double t = imm.chart_time(x, false);
        auto cf = imm.chart_frame(t);
        Vec s(n - 1);
        for (int i = 0; i < n - 1; ++i) s[i] = (x - cf.g).dot(cf.F.row(i + 1));
        out.value = DevelopableImmersion::evaluate_raw(cf, s);
        out.grad = DevelopableImmersion::gradient_raw(cf);
        out.second_form = imm.second_form_raw(cf, s);
        out.normal = cf.Ft.row(n).transpose();
        return out;
    }
    double side = (x - imm.curve().domain.point.back()).dot(imm.curve().domain.frame.back().row(0));
    double tend = side > 0 ? imm.length() : 0.0;
    auto cf = imm.chart_frame(tend);
    out.grad = DevelopableImmersion::gradient_raw(cf);
    out.value = cf.gt + out.grad * (x - cf.g);
    out.second_form = Mat::Zero(n, n);
    out.normal = cf.Ft.row(n).transpose();
    out.extended = true;
    return out;
}

struct ConvergenceRow {
    int m = 0;
    double err_val_sq = 0;
    double err_grad_sq = 0;
    double err_hess_sq = 0;
    double total() const { return err_val_sq + err_grad_sq + err_hess_sq; }
    double sliver_volume = 0; // |Omega(gamma) \ Omega(gamma_m)|, Monte Carlo
    double min_jacobian = 0;
    double margin = 0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool strictly_decreasing = true;
};

// W^{2,2} distance of each stage map to the input, both pulled back to the
// input's chart; the affine extension covers the sliver the stage curve does
// not reach.
inline ConvergenceReport convergence_report(
    const DevelopableImmersion& u,
    const std::vector<std::pair<SmoothingStageRecord, DevelopableImmersion>>& stages,
    const SmoothingConfig& cfg)
{
    ConvergenceReport rep;
    const int n = u.dim();
    const QuadratureSpec& q = cfg.quad;

    // t nodes of the composite rule
    std::vector<double> tn, tw;
    Quadrature base = gauss_legendre(q.t_nodes);
    for (int p = 0; p < std::max(1, q.t_panels); ++p) {
        double a = u.length() * p / std::max(1, q.t_panels);
        double b = u.length() * (p + 1) / std::max(1, q.t_panels);
        Quadrature mp = mapped(base, a, b);
        tn.insert(tn.end(), mp.x.begin(), mp.x.end());
        tw.insert(tw.end(), mp.w.begin(), mp.w.end());
    }

    double volume = 0; // |Omega(gamma)| by the chart rule, for the MC scale
    for (const auto& [rec, um] : stages) {
        ConvergenceRow row;
        row.m = rec.m;
        row.min_jacobian = rec.jacobian_floor;
        row.margin = measure_margin(um, 65, std::min(rec.sphere_count, 64), 512);

        std::vector<std::array<double, 4>> partial(tn.size());
        parallel_chunks(int(tn.size()), [&](int i) {
            double t = tn[i], wt = tw[i];
            auto cf = u.chart_frame(t);
            Mat Gu = DevelopableImmersion::gradient_raw(cf);
            Vec nu = cf.Ft.row(n).transpose();
            double vol = 0, ev = 0, eg = 0, eh = 0;

            auto add = [&](const Vec& s, double ws) {
                double J = u.jacobian(t, s);
                double w = ws * wt * J;
                Vec x = DevelopableImmersion::phi(cf, s);
                Vec uval = DevelopableImmersion::evaluate_raw(cf, s);
                Mat Au = u.second_form_raw(cf, s);
                StageEval mv = stage_eval(um, x);
                ev += (uval - mv.value).squaredNorm() * w;
                eg += (Gu - mv.grad).squaredNorm() * w;
                double hd = 0;
                for (int l = 0; l <= n; ++l)
                    hd += (nu[l] * Au - mv.normal[l] * mv.second_form).squaredNorm();
                eh += hd * w;
                vol += w;
            };

            if (n == 2) {
                Vec plus(1), minus(1);
                plus << 1.0;
                minus << -1.0;
                double Sp = u.boundary_extent(t, plus), Sm = u.boundary_extent(t, minus);
                Quadrature qs = mapped(gauss_legendre(q.s_nodes), -Sm, Sp);
                for (size_t j = 0; j < qs.x.size(); ++j) {
                    Vec s(1);
                    s << qs.x[j];
                    add(s, qs.w[j]);
                }
            } else {
                Quadrature qr = gauss_legendre(q.radial_nodes);
                for (int a = 0; a < q.angle_nodes; ++a) {
                    double th = 2.0 * M_PI * (a + 0.5) / q.angle_nodes;
                    Vec dir(2);
                    dir << std::cos(th), std::sin(th);
                    double S = u.boundary_extent(t, dir);
                    Quadrature qm = mapped(qr, 0.0, S);
                    for (size_t j = 0; j < qm.x.size(); ++j)
                        add(qm.x[j] * dir, qm.w[j] * qm.x[j] * 2.0 * M_PI / q.angle_nodes);
                }
            }
            partial[i] = {ev, eg, eh, vol};
        });
        double vol = 0;
        for (const auto& p : partial) {
            row.err_val_sq += p[0];
            row.err_grad_sq += p[1];
            row.err_hess_sq += p[2];
            vol += p[3];
        }
        volume = vol;

        // sliver volume by fixed-seed Monte Carlo over the covered set
        std::mt19937 rng(cfg.seed);
        auto [lo, hi] = u.domain().bounding_box();
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        long in_cov = 0, in_sliver = 0;
        for (int sidx = 0; sidx < cfg.mc_samples; ++sidx) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * uni(rng);
            if (!u.domain().contains(x)) continue;
            if (!detail::track_covers(u.curve().domain, x)) continue;
            ++in_cov;
            if (!detail::track_covers(um.curve().domain, x)) ++in_sliver;
        }
        row.sliver_volume = in_cov ? volume * double(in_sliver) / double(in_cov) : 0.0;

        rep.rows.push_back(row);
    }
    for (size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].total() < rep.rows[i - 1].total())) rep.strictly_decreasing = false;
    return rep;
}

struct SmoothingResult {
    double rho = 0;
    std::vector<std::pair<SmoothingStageRecord, DevelopableImmersion>> stages;
    ConvergenceReport report;
};

inline SmoothingResult run_smoothing(const DevelopableImmersion& u, const SmoothingConfig& cfg)
{
    require(!cfg.schedule.empty(), ErrorKind::invalid_input, "smoothing schedule is empty");
    for (size_t i = 1; i < cfg.schedule.size(); ++i)
        require(cfg.schedule[i] > cfg.schedule[i - 1], ErrorKind::invalid_input,
                "smoothing schedule must increase");
    SmoothingResult res;
    res.rho = resolve_rho(u, cfg);
    for (int m : cfg.schedule) {
        SmoothingStageRecord rec = build_smooth_curve(u, res.rho, cfg, m);
        DevelopableImmersion um = build_smooth_immersion(rec, u, cfg);
        res.stages.emplace_back(std::move(rec), std::move(um));
    }
    res.report = convergence_report(u, res.stages, cfg);
    return res;
}

// ---- gluing --------------------------------------------------------------

struct RigidMotion {
    Mat Q;
    Vec b;

    static RigidMotion identity(int k) { return {Mat::Identity(k, k), Vec::Zero(k)}; }
    Vec apply(const Vec& y) const { return Q * y + b; }

    double rotation_angle() const
    {
        Eigen::EigenSolver<Mat> es(Q);
        double worst = 0;
        for (int i = 0; i < Q.rows(); ++i) {
            auto ev = es.eigenvalues()[i];
            worst = std::max(worst, std::abs(std::atan2(ev.imag(), ev.real())));
        }
        return worst;
    }

    double translation_norm() const { return b.norm(); }
};

struct InterfaceReport {
    double value_jump = 0;
    double gradient_jump = 0;
    RigidMotion motion; // relative motion applied to the later piece
};

struct GluedChain {
    std::vector<DevelopableImmersion> pieces;
    std::vector<RigidMotion> motions; // cumulative, one per piece
    std::vector<InterfaceReport> interfaces;

    int piece_of(const Vec& x) const
    {
        for (size_t i = 0; i < pieces.size(); ++i)
            if (pieces[i].covered(x)) return int(i);
        return -1;
    }

    Vec evaluate(const Vec& x) const
    {
        int i = piece_of(x);
        require(i >= 0, ErrorKind::not_covered, "point not covered by any chain piece");
        return motions[i].apply(pieces[i].evaluate_at(x));
    }

    Mat gradient(const Vec& x) const
    {
        int i = piece_of(x);
        require(i >= 0, ErrorKind::not_covered, "point not covered by any chain piece");
        double t = pieces[i].phi_inverse(x).first;
        return motions[i].Q * pieces[i].gradient(t);
    }
};

namespace detail {

// Target frame [gradient columns | normal] at a chart time.
inline Mat target_basis(const DevelopableImmersion& imm, double t)
{
    auto cf = imm.chart_frame(t);
    const int n = imm.dim();
    Mat U(n + 1, n + 1);
    U.leftCols(n) = DevelopableImmersion::gradient_raw(cf);
    U.col(n) = cf.Ft.row(n).transpose();
    return U;
}

} // namespace detail

// Chain consecutive pieces with the unique rigid motions matching value and
// gradient on the shared leading plane. Pieces must be affine near their
// interfaces (the cutoff windows guarantee this for pipeline output) and the
// chain of interface planes must not revisit a plane.
inline GluedChain glue_arms(const std::vector<DevelopableImmersion>& pieces)
{
    require(!pieces.empty(), ErrorKind::invalid_input, "empty chain");
    GluedChain chain;
    chain.pieces = pieces;
    chain.motions.assign(pieces.size(), RigidMotion::identity(pieces[0].dim() + 1));
    if (pieces.size() == 1) return chain;

    const int n = pieces[0].dim();

    // first pass: interface geometry, affinity, and topology of the whole
    // chain, before any values are matched
    std::vector<std::pair<Vec, double>> seen_planes;
    for (size_t k = 0; k + 1 < pieces.size(); ++k) {
        const auto& a = pieces[k];
        const auto& b = pieces[k + 1];
        require(b.dim() == n, ErrorKind::invalid_input, "chain pieces have mixed dimension");

        Vec na = a.curve().domain.frame.back().row(0).transpose();
        Vec pa = a.curve().domain.point.back();
        Vec nb = b.curve().domain.frame.front().row(0).transpose();
        Vec pb = b.curve().domain.point.front();
        require(na.dot(nb) > 1.0 - 1e-8, ErrorKind::not_glueable,
                "consecutive pieces do not share an oriented interface plane");
        require(std::abs((pb - pa).dot(na)) <= 1e-8, ErrorKind::not_glueable,
                "interface planes of consecutive pieces do not coincide");

        // both sides must be affine at the interface
        Vec zero = Vec::Zero(n - 1);
        require(a.second_fundamental_form(a.length(), zero).norm() <= 1e-8 &&
                    b.second_fundamental_form(0.0, zero).norm() <= 1e-8,
                ErrorKind::not_glueable, "pieces are not affine near the shared plane");

        // cycle detection on the sign-canonical interface plane list
        Vec ncan = na;
        double ccan = na.dot(pa);
        for (int i = 0; i < n; ++i)
            if (std::abs(ncan[i]) > 1e-9) {
                if (ncan[i] < 0) { ncan = -ncan; ccan = -ccan; }
                break;
            }
        for (const auto& [pn, pc] : seen_planes)
            require(!(std::abs(pn.dot(ncan)) > 1.0 - 1e-9 &&
                      std::abs(pc - ccan) <= 1e-9 * (1.0 + std::abs(pc))),
                    ErrorKind::invalid_topology, "chain revisits an interface plane");
        seen_planes.emplace_back(ncan, ccan);
    }

    // second pass: rigid motions and residual jumps
    for (size_t k = 0; k + 1 < pieces.size(); ++k) {
        const auto& a = pieces[k];
        const auto& b = pieces[k + 1];
        Vec na = a.curve().domain.frame.back().row(0).transpose();
        Vec pa = a.curve().domain.point.back();
        Vec pb = b.curve().domain.point.front();

        Mat Ua = detail::target_basis(a, a.length());
        Mat Ub = detail::target_basis(b, 0.0);
        RigidMotion rel;
        rel.Q = Ua * Ub.transpose();
        Vec xstar = pb;
        Vec va = a.evaluate_at(xstar);
        auto cfb = b.chart_frame(0.0);
        Vec sb(n - 1);
        for (int i = 0; i < n - 1; ++i) sb[i] = (xstar - cfb.g).dot(cfb.F.row(i + 1));
        Vec vb = DevelopableImmersion::evaluate_raw(cfb, sb);
        rel.b = va - rel.Q * vb;

        chain.motions[k + 1].Q = chain.motions[k].Q * rel.Q;
        chain.motions[k + 1].b = chain.motions[k].Q * rel.b + chain.motions[k].b;

        // measure the residual jumps at physical points on the shared plane
        InterfaceReport ir;
        ir.motion = rel;
        require(b.domain().contains(pa) && a.domain().contains(pa), ErrorKind::not_glueable,
                "interface point is outside a piece's domain");
        Mat Fa = a.curve().domain.frame.back();
        auto dirs = sphere_directions(n - 1, n == 2 ? 2 : 16);
        for (const auto& dir : dirs) {
            Vec w = Vec::Zero(n);
            for (int i = 0; i < n - 1; ++i) w += dir[i] * Fa.row(i + 1).transpose();
            w /= w.norm();
            double Sd = std::min(a.domain().boundary_distance(pa, w),
                                 b.domain().boundary_distance(pa, w));
            for (double f : {0.2, 0.5, 0.8}) {
                Vec x = pa + f * Sd * w;
                Vec ya = chain.motions[k].apply(a.evaluate_at(x));
                Vec yb = chain.motions[k + 1].apply(b.evaluate_at(x));
                ir.value_jump = std::max(ir.value_jump, (ya - yb).norm());
            }
        }
        Mat Ga = chain.motions[k].Q * a.gradient(a.length());
        Mat Gb = chain.motions[k + 1].Q * b.gradient(0.0);
        ir.gradient_jump = (Ga - Gb).norm();
        chain.interfaces.push_back(std::move(ir));
    }
    return chain;
}

} // namespace devim
