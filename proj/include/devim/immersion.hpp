// immersion.hpp -- a developable immersion assembled from a framed leading
// curve inside a convex domain: the ruled chart Phi(t,s), the induced map
// u, grad u, hess u, the ruling-safety distances S and L, the chart Jacobian
// and the change-of-variable Sobolev norms.
#pragma once

#include "core.hpp"
#include "frames.hpp"
#include "geometry.hpp"

#include <limits>
#include <sstream>

namespace devim {

struct RulingDistances {
    double S = 0;                                          // distance to the boundary
    double L = std::numeric_limits<double>::infinity();    // distance to the nearest front crossing
    double minimizer = std::numeric_limits<double>::quiet_NaN();
    bool finite() const { return std::isfinite(L); }
};

struct ValidationReport {
    double min_jacobian = std::numeric_limits<double>::infinity();
    double jac_witness_t = 0;
    Vec jac_witness_s;
    double min_safety_gap = std::numeric_limits<double>::infinity(); // min(L - S)
    double safety_witness_t = 0;
    Vec safety_witness_dir;
    double max_isometry_residual = 0;
    int t_samples = 0, dir_samples = 0, radius_samples = 0, inner_grid = 0;

    bool jacobian_ok() const { return min_jacobian > 0; }
    bool safety_ok() const { return !(min_safety_gap < -1e-9); }
    bool isometry_ok() const { return max_isometry_residual <= 1e-9; }
    bool pass() const { return jacobian_ok() && safety_ok() && isometry_ok(); }

    std::string to_text() const
    {
        std::ostringstream os;
        os << "min_jacobian = " << min_jacobian
           << "  (witness t = " << jac_witness_t << ")\n";
        os << "min_safety_gap = ";
        if (std::isfinite(min_safety_gap)) os << min_safety_gap;
        else os << "unbounded";
        os << "\n";
        os << "max_isometry_residual = " << max_isometry_residual << "\n";
        os << "grid: t=" << t_samples << " dirs=" << dir_samples
           << " radii=" << radius_samples << " inner=" << inner_grid << "\n";
        os << "jacobian: " << (jacobian_ok() ? "pass" : "FAIL") << "\n";
        os << "safety (L >= S): " << (safety_ok() ? "pass" : "FAIL") << "\n";
        os << "isometry: " << (isometry_ok() ? "pass" : "FAIL") << "\n";
        os << "overall: " << (pass() ? "pass" : "FAIL") << "\n";
        return os.str();
    }
};

struct QuadratureSpec {
    int t_nodes = 64;  // Gauss-Legendre nodes per t-panel
    int t_panels = 1;
    int s_nodes = 64;  // n=2: nodes across the covered segment
    int angle_nodes = 64;  // n=3: uniform angles
    int radial_nodes = 32; // n=3: radial Gauss-Legendre nodes
};

struct SobolevNorms {
    double u_sq = 0;
    double grad_sq = 0;
    double hess_sq = 0;
    double volume = 0; // |Omega(gamma)| by the same rule with integrand 1
};

class DevelopableImmersion {
public:
    DevelopableImmersion(FramedCurve curve, ConvexDomain domain)
        : curve_(std::move(curve)), domain_(std::move(domain))
    {
        require(curve_.has_target(), ErrorKind::invalid_input,
                "immersion needs both domain and Darboux frames");
        require(domain_.dim() == curve_.n, ErrorKind::invalid_input,
                "domain dimension does not match the curve");
    }

    int dim() const { return curve_.n; }
    double length() const { return curve_.length(); }
    const FramedCurve& curve() const { return curve_; }
    const ConvexDomain& domain() const { return domain_; }

    // Frames at one chart parameter, cached by quadrature loops.
    struct ChartFrame {
        double t;
        Vec g;   // gamma(t)
        Mat F;   // domain frame rows
        Vec gt;  // gamma~(t)
        Mat Ft;  // target frame rows
    };

    ChartFrame chart_frame(double t) const
    {
        return {t, curve_.gamma(t), curve_.frame(t), curve_.gamma_target(t),
                curve_.frame_target(t)};
    }

    Vec phi(double t, const Vec& s) const
    {
        check_s(s);
        Mat F = curve_.frame(t);
        Vec x = curve_.gamma(t);
        for (int i = 0; i < dim() - 1; ++i) x += s[i] * F.row(i + 1).transpose();
        return x;
    }

    static Vec phi(const ChartFrame& cf, const Vec& s)
    {
        Vec x = cf.g;
        for (int i = 0; i < s.size(); ++i) x += s[i] * cf.F.row(i + 1).transpose();
        return x;
    }

    // Unique (t, s) with Phi(t,s) = x. The chart time solves
    // (x - gamma(t)) . gamma'(t) = 0; brackets come from a scan of the
    // integration grid, refined by bisection.
    std::pair<double, Vec> phi_inverse(const Vec& x) const
    {
        require(x.size() == dim(), ErrorKind::invalid_input, "point dimension mismatch");
        require(domain_.contains(x), ErrorKind::precondition_violation,
                "phi_inverse point must lie inside the domain");
        double t = chart_time(x, true);
        Mat F = curve_.frame(t);
        Vec g = curve_.gamma(t);
        Vec s(dim() - 1);
        for (int i = 0; i < dim() - 1; ++i) s[i] = (x - g).dot(F.row(i + 1));
        return {t, s};
    }

    // Non-throwing coverage probe.
    bool covered(const Vec& x) const
    {
        if (x.size() != dim() || !domain_.contains(x)) return false;
        return count_chart_roots(x) == 1;
    }

    Vec evaluate(double t, const Vec& s) const
    {
        check_s(s);
        require(domain_.contains(phi(t, s)), ErrorKind::not_covered,
                "chart point falls outside the domain");
        return evaluate_raw(chart_frame(t), s);
    }

    static Vec evaluate_raw(const ChartFrame& cf, const Vec& s)
    {
        Vec y = cf.gt;
        for (int i = 0; i < s.size(); ++i) y += s[i] * cf.Ft.row(i + 1).transpose();
        return y;
    }

    Vec evaluate_at(const Vec& x) const
    {
        auto [t, s] = phi_inverse(x);
        return evaluate_raw(chart_frame(t), s);
    }

    // (n+1) x n matrix; independent of s.
    Mat gradient(double t) const { return gradient_raw(chart_frame(t)); }

    static Mat gradient_raw(const ChartFrame& cf)
    {
        const int n = int(cf.F.rows());
        return cf.Ft.topRows(n).transpose() * cf.F;
    }

    double jacobian(double t, const Vec& s) const
    {
        check_s(s);
        double J = 1.0;
        for (int i = 0; i < dim() - 1; ++i) J -= s[i] * curve_.profile.front(i, t);
        return J;
    }

    // A = [kappa_n / (1 - sum s_i kappa_i)] gamma' (x) gamma'.
    Mat second_fundamental_form(double t, const Vec& s) const
    {
        return second_form_raw(chart_frame(t), s);
    }

    Mat second_form_raw(const ChartFrame& cf, const Vec& s) const
    {
        double J = jacobian(cf.t, s);
        require(J > 0, ErrorKind::inconsistent_immersion,
                "chart Jacobian is not positive at the requested point");
        double factor = curve_.profile.normal_curvature(cf.t) / J;
        Vec tan = cf.F.row(0).transpose();
        return factor * (tan * tan.transpose());
    }

    // Slices hess[l] = normal^l * A.
    std::vector<Mat> hessian(double t, const Vec& s) const
    {
        ChartFrame cf = chart_frame(t);
        Mat A = second_form_raw(cf, s);
        Vec nrm = cf.Ft.row(dim()).transpose();
        std::vector<Mat> slices(dim() + 1);
        for (int l = 0; l <= dim(); ++l) slices[l] = nrm[l] * A;
        return slices;
    }

    // S along the front direction: sup{ S >= 0 : Phi(t, S s) in Omega },
    // which is 0 when gamma(t) itself is not inside (the set is empty there;
    // curves may touch the boundary at their ends).
    double boundary_extent(double t, const Vec& s_dir) const
    {
        Vec g = curve_.gamma(t);
        if (!domain_.contains(g)) return 0.0;
        Vec w = front_direction(t, s_dir);
        return domain_.boundary_distance(g, w);
    }

    // Distance from gamma(t) along the front direction to the intersection
    // with the front at t_tilde; +infinity for parallel fronts or rays that
    // miss.
    double front_crossing(double t, double t_tilde, const Vec& s_dir) const
    {
        check_s(s_dir);
        const auto& tr = curve_.domain;
        return front_hit(tr.frame_at(t), tr.point_at(t), tr.frame_at(t_tilde),
                         tr.point_at(t_tilde), s_dir / s_dir.norm());
    }

    RulingDistances ruling_distances(double t, const Vec& s_dir_in, int inner_cap = 2048) const
    {
        check_s(s_dir_in);
        require(t >= -1e-12 && t <= length() + 1e-12, ErrorKind::invalid_input,
                "t outside [0, length]");
        require(std::abs(s_dir_in.norm() - 1.0) <= 1e-12, ErrorKind::invalid_input,
                "s_dir must be a unit vector to 1e-12");
        Vec s_dir = s_dir_in / s_dir_in.norm();

        RulingDistances rd;
        rd.S = boundary_extent(t, s_dir);

        const auto& tr = curve_.domain;
        Mat Ft = tr.frame_at(t);
        Vec gt = tr.point_at(t);
        const double excl = 0.75 * tr.step;
        const int stride = std::max(1, tr.cells() / std::max(1, inner_cap));

        double bestL = std::numeric_limits<double>::infinity();
        double bestT = std::numeric_limits<double>::quiet_NaN();
        for (int k = 0; k < int(tr.t.size()); k += stride) {
            double tk = tr.t[k];
            if (std::abs(tk - t) < excl) continue;
            double L = front_hit(Ft, gt, tr.frame[k], tr.point[k], s_dir);
            if (L < bestL) { bestL = L; bestT = tk; }
        }
        // always consider the last grid node
        if (std::abs(tr.t.back() - t) >= excl) {
            double L = front_hit(Ft, gt, tr.frame.back(), tr.point.back(), s_dir);
            if (L < bestL) { bestL = L; bestT = tr.t.back(); }
        }

        if (std::isfinite(bestL)) {
            double halo = stride * tr.step;
            double a = std::max(0.0, bestT - halo), b = std::min(length(), bestT + halo);
            if (t > a - excl && t < b + excl) { // keep the exclusion zone out of the bracket
                if (bestT < t) b = std::min(b, t - excl);
                else a = std::max(a, t + excl);
            }
            if (b > a) {
                auto val = [&](double tau) {
                    double L = front_hit(Ft, gt, tr.frame_at(tau), tr.point_at(tau), s_dir);
                    return std::isfinite(L) ? L : 1e300;
                };
                const double g = (std::sqrt(5.0) - 1.0) / 2.0;
                double x1 = b - g * (b - a), x2 = a + g * (b - a);
                double f1 = val(x1), f2 = val(x2);
                const double tol = 1e-8 * length();
                while (b - a > tol) {
                    if (f1 > f2) { a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = val(x2); }
                    else { b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = val(x1); }
                }
                double fr = std::min(f1, f2);
                if (fr < bestL) { bestL = fr; bestT = 0.5 * (a + b); }
            }
        }
        rd.L = bestL;
        rd.minimizer = bestT;
        return rd;
    }

    // Sweep a (t, direction, radius) grid restricted to the covered set and
    // report the worst Jacobian, the worst L - S gap, and the isometry
    // residual at every grid time.
    ValidationReport validate(int t_samples = 129, int dir_samples = 64,
                              int radius_samples = 32, int inner_cap = 1024) const
    {
        ValidationReport rep;
        rep.t_samples = t_samples;
        rep.dir_samples = dir_samples;
        rep.radius_samples = radius_samples;
        rep.inner_grid = std::min(inner_cap, curve_.domain.cells() + 1);

        const auto& tr = curve_.domain;
        auto dirs = sphere_directions(dim() - 1, dir_samples);
        rep.dir_samples = int(dirs.size());

        std::vector<double> ts(t_samples);
        for (int i = 0; i < t_samples; ++i) {
            int k = int(std::llround(double(i) * tr.cells() / (t_samples - 1)));
            ts[i] = tr.t[std::min(k, tr.cells())];
        }

        std::vector<ValidationReport> partial(t_samples);
        parallel_chunks(t_samples, [&](int i) {
            ValidationReport& p = partial[i];
            double t = ts[i];
            for (const auto& dir : dirs) {
                RulingDistances rd = ruling_distances(t, dir, inner_cap);
                double gap = rd.L - rd.S;
                if (gap < p.min_safety_gap) {
                    p.min_safety_gap = gap;
                    p.safety_witness_t = t;
                    p.safety_witness_dir = dir;
                }
                for (int r = 0; r < radius_samples; ++r) {
                    Vec s = rd.S * (r + 0.5) / radius_samples * dir;
                    double J = jacobian(t, s);
                    if (J < p.min_jacobian) {
                        p.min_jacobian = J;
                        p.jac_witness_t = t;
                        p.jac_witness_s = s;
                    }
                }
            }
        });
        for (const auto& p : partial) {
            if (p.min_jacobian < rep.min_jacobian) {
                rep.min_jacobian = p.min_jacobian;
                rep.jac_witness_t = p.jac_witness_t;
                rep.jac_witness_s = p.jac_witness_s;
            }
            if (p.min_safety_gap < rep.min_safety_gap) {
                rep.min_safety_gap = p.min_safety_gap;
                rep.safety_witness_t = p.safety_witness_t;
                rep.safety_witness_dir = p.safety_witness_dir;
            }
        }

        for (size_t k = 0; k < tr.t.size(); ++k) {
            Mat G = curve_.target.frame[k].topRows(dim()).transpose() * tr.frame[k];
            double r = max_abs(G.transpose() * G - Mat::Identity(dim(), dim()));
            rep.max_isometry_residual = std::max(rep.max_isometry_residual, r);
        }
        return rep;
    }

    // Integrals over Omega(gamma) on the (t, s) chart with the Jacobian
    // weight. The gradient energy is computed from the actual gradient, and
    // the covered volume from the same rule with integrand 1, so the
    // gradient-energy identity is a genuine consistency check.
    SobolevNorms sobolev_norms(const QuadratureSpec& q = {}) const
    {
        require(dim() <= 3, ErrorKind::invalid_input,
                "chart quadrature implemented for n = 2, 3");
        quick_jacobian_check();

        const int panels = std::max(1, q.t_panels);
        Quadrature base = gauss_legendre(q.t_nodes);
        std::vector<double> tn, tw;
        for (int p = 0; p < panels; ++p) {
            double a = length() * p / panels, b = length() * (p + 1) / panels;
            Quadrature mp = mapped(base, a, b);
            tn.insert(tn.end(), mp.x.begin(), mp.x.end());
            tw.insert(tw.end(), mp.w.begin(), mp.w.end());
        }

        std::vector<SobolevNorms> partial(tn.size());
        parallel_chunks(int(tn.size()), [&](int i) {
            partial[i] = slice_integrals(tn[i], tw[i], q);
        });
        SobolevNorms total;
        for (const auto& p : partial) {
            total.u_sq += p.u_sq;
            total.grad_sq += p.grad_sq;
            total.hess_sq += p.hess_sq;
            total.volume += p.volume;
        }
        return total;
    }

    double covered_volume(const QuadratureSpec& q = {}) const { return sobolev_norms(q).volume; }

    // Chart time of x, ignoring coverage (used by callers that handle the
    // affine extension themselves). Returns the number of chart roots.
    int count_chart_roots(const Vec& x) const
    {
        int count = 0;
        double dummy;
        scan_roots(x, count, dummy);
        return count;
    }

    double chart_time(const Vec& x, bool strict) const
    {
        int count = 0;
        double root = 0;
        bool any = scan_roots(x, count, root);
        if (strict) {
            require(any, ErrorKind::not_covered, "point is not covered by any leading front");
            require(count == 1, ErrorKind::inconsistent_immersion,
                    "multiple leading fronts pass through the point");
        }
        return root;
    }

    // Signed front coordinate of x relative to the front at parameter t.
    double front_offset(const Vec& x, double t) const
    {
        return (x - curve_.gamma(t)).dot(curve_.tangent(t));
    }

private:
    void check_s(const Vec& s) const
    {
        require(s.size() == dim() - 1, ErrorKind::invalid_input,
                "front coordinate must have dimension n-1");
    }

    Vec front_direction(double t, const Vec& s_dir) const
    {
        Mat F = curve_.frame(t);
        Vec w = Vec::Zero(dim());
        for (int i = 0; i < dim() - 1; ++i) w += s_dir[i] * F.row(i + 1).transpose();
        return w / w.norm();
    }

    // Distance from gamma(t) along sum s_i N_i(t) to the intersection of the
    // fronts at t and t~, by the Cramer determinants
    //   h_i = det[N_1(t~),...,N_{n-1}(t~), N_i(t)]
    //   H   = det[N_1(t~),...,N_{n-1}(t~), gamma(t) - gamma(t~)].
    // Parallel fronts (all h_i below 1e-12) and rays that do not hit give
    // +infinity.
    double front_hit(const Mat& Ft, const Vec& gt, const Mat& Ftt, const Vec& gtt,
                     const Vec& s_dir) const
    {
        const int n = dim();
        Mat M(n, n);
        for (int j = 0; j < n - 1; ++j) M.col(j) = Ftt.row(j + 1).transpose();
        double hs = 0, hmax = 0;
        for (int i = 0; i < n - 1; ++i) {
            M.col(n - 1) = Ft.row(i + 1).transpose();
            double hi = M.determinant();
            hmax = std::max(hmax, std::abs(hi));
            hs += hi * s_dir[i];
        }
        if (hmax < 1e-12) return std::numeric_limits<double>::infinity();
        M.col(n - 1) = gt - gtt;
        double H = M.determinant();
        require(std::abs(H) > 1e-12, ErrorKind::degenerate_geometry,
                "front intersection system is singular for non-parallel fronts");
        double c = -hs / H;
        return c > 0 ? 1.0 / c : std::numeric_limits<double>::infinity();
    }

    bool scan_roots(const Vec& x, int& count, double& root) const
    {
        const auto& tr = curve_.domain;
        const int M = tr.cells();
        count = 0;
        bool any = false;
        double prev = (x - tr.point[0]).dot(tr.frame[0].row(0));
        if (std::abs(prev) < 1e-10) {
            ++count;
            root = 0.0;
            any = true;
        }
        for (int k = 1; k <= M; ++k) {
            double cur = (x - tr.point[k]).dot(tr.frame[k].row(0));
            if (std::abs(cur) < 1e-10) {
                if (!any || std::abs(tr.t[k] - root) > 2.0 * tr.step) ++count;
                root = tr.t[k];
                any = true;
            } else if (prev * cur < 0) {
                double r = refine_root(x, tr.t[k - 1], tr.t[k]);
                if (!any || std::abs(r - root) > 2.0 * tr.step) ++count;
                root = r;
                any = true;
            }
            prev = cur;
        }
        return any;
    }

    double refine_root(const Vec& x, double a, double b) const
    {
        auto g = [&](double t) { return (x - curve_.gamma(t)).dot(curve_.tangent(t)); };
        double fa = g(a);
        for (int it = 0; it < 52; ++it) {
            double mid = 0.5 * (a + b);
            double fm = g(mid);
            if (fa * fm <= 0) b = mid;
            else { a = mid; fa = fm; }
        }
        return 0.5 * (a + b);
    }

    void quick_jacobian_check() const
    {
        auto dirs = sphere_directions(dim() - 1, 16);
        for (int i = 0; i <= 32; ++i) {
            double t = length() * i / 32.0;
            for (const auto& dir : dirs) {
                double S = boundary_extent(t, dir);
                for (int r = 1; r <= 8; ++r) {
                    Vec s = S * (r - 0.125) / 8.0 * dir;
                    require(jacobian(t, s) > 0, ErrorKind::precondition_violation,
                            "immersion invalid: chart Jacobian is not positive");
                }
            }
        }
    }

    SobolevNorms slice_integrals(double t, double wt, const QuadratureSpec& q) const
    {
        SobolevNorms acc;
        ChartFrame cf = chart_frame(t);
        Mat G = gradient_raw(cf);
        const double grad_f2 = G.squaredNorm();
        const double kn = curve_.profile.normal_curvature(t);
        const double nn = cf.Ft.row(dim()).squaredNorm();

        auto add_point = [&](const Vec& s, double ws) {
            double J = jacobian(t, s);
            double m = ws * wt;
            acc.volume += J * m;
            acc.u_sq += evaluate_raw(cf, s).squaredNorm() * J * m;
            acc.grad_sq += grad_f2 * J * m;
            if (J > 0) acc.hess_sq += (kn * kn / (J * J)) * nn * J * m;
        };

        if (dim() == 2) {
            Vec plus(1), minus(1);
            plus << 1.0;
            minus << -1.0;
            double Sp = boundary_extent(t, plus), Sm = boundary_extent(t, minus);
            Quadrature qs = mapped(gauss_legendre(q.s_nodes), -Sm, Sp);
            for (size_t i = 0; i < qs.x.size(); ++i) {
                Vec s(1);
                s << qs.x[i];
                add_point(s, qs.w[i]);
            }
        } else {
            Quadrature qr = gauss_legendre(q.radial_nodes);
            for (int a = 0; a < q.angle_nodes; ++a) {
                double th = 2.0 * M_PI * (a + 0.5) / q.angle_nodes;
                Vec dir(2);
                dir << std::cos(th), std::sin(th);
                double S = boundary_extent(t, dir);
                Quadrature qm = mapped(qr, 0.0, S);
                double wth = 2.0 * M_PI / q.angle_nodes;
                for (size_t i = 0; i < qm.x.size(); ++i)
                    add_point(qm.x[i] * dir, qm.w[i] * qm.x[i] * wth);
            }
        }
        return acc;
    }

    FramedCurve curve_;
    ConvexDomain domain_;
};

} // namespace devim
