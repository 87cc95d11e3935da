// Shared fixtures and independent oracles for the test suite. The matrix
// exponential oracle goes through Eigen's Pade implementation, a different
// code path from the library's own series-based stepper.
#pragma once

#include <devim/analyzer.hpp>
#include <devim/smoothing.hpp>

#include <unsupported/Eigen/MatrixFunctions>

namespace fixtures {

using namespace devim;

inline Mat expm_oracle(const Mat& A)
{
    return A.exp();
}

// Straight lead curve along e1 in a disc: u is a cylinder when kappa_n = 1.
inline DevelopableImmersion cylinder2(ScalarFn kn = constant_fn(1.0), double ell = 1.5,
                                      double disc_radius = 1.0, double step = 1e-3)
{
    CurvatureProfile prof(2, ell, 2.0, {constant_fn(0.0)}, {}, std::move(kn));
    Vec g0(2);
    g0 << -0.5 * ell, 0.0;
    FramedCurve fc = integrate_domain_frame(prof, g0, Mat::Identity(2, 2), step);
    Vec y0;
    Mat G0;
    default_target_seed(fc, y0, G0);
    integrate_darboux_frame(fc, y0, G0);
    return DevelopableImmersion(std::move(fc), ConvexDomain::ball(Vec::Zero(2), disc_radius));
}

// The cylinder of the closed-form checks: gamma(t) = (t - ell/2, 0),
// u(x) = (sin x1', x2, 1 - cos x1') in chart coordinates.
inline DevelopableImmersion flat2(double ell = 1.5, double disc_radius = 1.0)
{
    return cylinder2(constant_fn(0.0), ell, disc_radius);
}

// Circular arc of radius R (kappa1 = 1/R) with a safely small disc centered
// at the arc midpoint.
inline DevelopableImmersion arc2(double R, double ell, double disc_radius,
                                 ScalarFn kn = constant_fn(0.0), double step = 1e-3)
{
    CurvatureProfile prof(2, ell, std::max(2.0, 2.0 / R), {constant_fn(1.0 / R)}, {},
                          std::move(kn));
    FramedCurve probe = integrate_domain_frame(prof, Vec::Zero(2), Mat::Identity(2, 2), step);
    Vec mid = probe.gamma(0.5 * ell);
    Vec y0;
    Mat G0;
    default_target_seed(probe, y0, G0);
    integrate_darboux_frame(probe, y0, G0);
    return DevelopableImmersion(std::move(probe), ConvexDomain::ball(mid, disc_radius));
}

// n = 3 straight lead curve in a ball.
inline DevelopableImmersion cylinder3(ScalarFn kn = constant_fn(1.0), double ell = 1.5,
                                      double ball_radius = 0.8, double step = 1e-3)
{
    CurvatureProfile prof(3, ell, 2.0, {constant_fn(0.0), constant_fn(0.0)},
                          {constant_fn(0.0)}, std::move(kn));
    Vec g0(3);
    g0 << -0.5 * ell, 0.0, 0.0;
    FramedCurve fc = integrate_domain_frame(prof, g0, Mat::Identity(3, 3), step);
    Vec y0;
    Mat G0;
    default_target_seed(fc, y0, G0);
    integrate_darboux_frame(fc, y0, G0);
    return DevelopableImmersion(std::move(fc), ConvexDomain::ball(Vec::Zero(3), ball_radius));
}

// Cylinder-with-corner of the smoothing runs: kappa_n steps 0 -> 1 halfway.
inline DevelopableImmersion cylinder_corner(double ell = 1.5, double step = 1e-3)
{
    return cylinder2([ell](double t) { return t < 0.5 * ell ? 0.0 : 1.0; }, ell, 1.0, step);
}

// Closed-form sample maps for the analyzer.
inline Vec cylinder_map(const Vec& x)
{
    Vec u(3);
    u << std::sin(x[0]), x[1], 1.0 - std::cos(x[0]);
    return u;
}

inline Vec cone_map(const Vec& x)
{
    double r = x.norm(), th = std::atan2(x[1], x[0]);
    Vec u(3);
    u << 0.5 * r * std::cos(2 * th), 0.5 * r * std::sin(2 * th), 0.5 * std::sqrt(3.0) * r;
    return u;
}

inline SampledMap disc_samples(double h, double radius, const std::function<Vec(const Vec&)>& fn)
{
    Vec lo = Vec::Constant(2, -radius - 4 * h), hi = Vec::Constant(2, radius + 4 * h);
    return SampledMap::from_function(lo, hi, h,
                                     [radius](const Vec& x) { return x.norm() < radius; }, fn);
}

inline SampledMap annulus_samples(double h, double r0, double r1,
                                  const std::function<Vec(const Vec&)>& fn)
{
    Vec lo = Vec::Constant(2, -r1 - 4 * h), hi = Vec::Constant(2, r1 + 4 * h);
    return SampledMap::from_function(
        lo, hi, h, [r0, r1](const Vec& x) { double r = x.norm(); return r > r0 && r < r1; },
        fn);
}

} // namespace fixtures
