// frames.hpp -- orthonormal moving frames driven by skew curvature
// generators. Each integration step applies the exact exponential of the
// generator frozen at the step midpoint, so the frame stays orthogonal by
// construction and the per-step re-orthonormalization only scrubs rounding.
#pragma once

#include "core.hpp"
#include "geometry.hpp"
#include "profile.hpp"

namespace devim {

namespace detail {

// exp of the augmented matrix [[hK, hI],[0,0]] packs both the propagator
// exp(hK) and the tangent integral int_0^h exp(sK) ds.
struct StepExp {
    Mat E;  // exp(hK)
    Mat I1; // int_0^h exp(sK) ds
};

inline StepExp step_exp(const Mat& K, double h)
{
    const int k = int(K.rows());
    Mat M = Mat::Zero(2 * k, 2 * k);
    M.topLeftCorner(k, k) = h * K;
    M.topRightCorner(k, k) = h * Mat::Identity(k, k);
    Mat E = expm(M);
    return {E.topLeftCorner(k, k), E.topRightCorner(k, k)};
}

} // namespace detail

// One integrated curve-plus-frame. Rows of each frame matrix are the frame
// vectors; row 0 is the curve tangent, so point' = frame.row(0). The midpoint
// generators are cached per cell, so evaluation between grid nodes reuses the
// integrator's own frozen generator instead of re-entering the (possibly
// expensive) profile closures.
struct FrameTrack {
    double length = 0;
    double step = 0;
    std::vector<double> t;
    std::vector<Vec> point;
    std::vector<Mat> frame;
    std::vector<Mat> kmid; // generator at each cell midpoint

    bool empty() const { return t.empty(); }
    int cells() const { return int(t.size()) - 1; }
    int space_dim() const { return frame.empty() ? 0 : int(frame[0].rows()); }

    int cell_of(double tt) const
    {
        int k = int(std::floor(tt / step));
        return std::min(std::max(k, 0), cells() - 1);
    }

    // Frame at an arbitrary parameter, by the integrator's own update from
    // the cell's left node. Continuous across cells up to rounding.
    Mat frame_at(double tt) const
    {
        tt = std::clamp(tt, 0.0, length);
        int k = cell_of(tt);
        double tau = tt - t[k];
        if (tau < 1e-15) return frame[k];
        return expm(tau * kmid[k]) * frame[k];
    }

    Vec point_at(double tt) const
    {
        tt = std::clamp(tt, 0.0, length);
        int k = cell_of(tt);
        double tau = tt - t[k];
        if (tau < 1e-15) return point[k];
        auto se = detail::step_exp(kmid[k], tau);
        return point[k] + (se.I1 * frame[k]).row(0).transpose();
    }

    Vec tangent_at(double tt) const { return frame_at(tt).row(0).transpose(); }
};

inline FrameTrack integrate_track(const std::function<Mat(double)>& generator, double length,
                                  const Vec& x0, const Mat& F0, double step)
{
    FrameTrack tr;
    tr.length = length;
    const int M = std::max(1, int(std::ceil(length / step - 1e-9)));
    tr.step = length / M;
    tr.t.resize(M + 1);
    tr.point.resize(M + 1);
    tr.frame.resize(M + 1);
    tr.kmid.resize(M);

    Mat F = F0;
    Vec x = x0;
    tr.t[0] = 0;
    tr.point[0] = x;
    tr.frame[0] = F;
    for (int k = 0; k < M; ++k) {
        double tk = k * tr.step;
        tr.kmid[k] = generator(tk + 0.5 * tr.step);
        auto se = detail::step_exp(tr.kmid[k], tr.step);
        x += (se.I1 * F).row(0).transpose();
        F = se.E * F;
        orthonormalize_rows(F);
        tr.t[k + 1] = (k + 1 == M) ? length : (k + 1) * tr.step;
        tr.point[k + 1] = x;
        tr.frame[k + 1] = F;
    }
    return tr;
}

// A leading curve with its domain frame and, once the Darboux system has been
// integrated, the corresponding image curve and target frame.
struct FramedCurve {
    int n = 0;
    CurvatureProfile profile;
    FrameTrack domain; // rows: gamma', N_1..N_{n-1}           (n x n)
    FrameTrack target; // rows: gamma~', v_1..v_{n-1}, normal  ((n+1) x (n+1))

    bool has_target() const { return !target.empty(); }
    double length() const { return domain.length; }

    Vec gamma(double t) const { return domain.point_at(t); }
    Mat frame(double t) const { return domain.frame_at(t); }
    Vec tangent(double t) const { return domain.tangent_at(t); }
    Vec gamma_target(double t) const { return target.point_at(t); }
    Mat frame_target(double t) const { return target.frame_at(t); }
};

namespace detail {

inline void check_initial_frame(const Mat& F0, int k, double bound, double step, double length)
{
    require(F0.rows() == k && F0.cols() == k, ErrorKind::invalid_input,
            "initial frame has the wrong shape");
    require(orthogonality_defect(F0) <= 1e-10, ErrorKind::invalid_input,
            "initial frame is not orthogonal to 1e-10");
    require(std::abs(F0.determinant() - 1.0) <= 1e-10, ErrorKind::invalid_input,
            "initial frame must have determinant +1");
    require(step > 0 && step <= length / 10.0, ErrorKind::step_too_coarse,
            "step must be positive and at most length/10");
    require(step * bound <= 0.5, ErrorKind::step_too_coarse,
            "step too large for the declared curvature bound");
}

} // namespace detail

// Solve F' = K(t) F for the domain frame and accumulate gamma from its
// tangent row. |gamma'| = 1 holds exactly at grid times because the tangent
// is the first row of an orthonormalized frame.
inline FramedCurve integrate_domain_frame(const CurvatureProfile& profile,
                                          const Vec& gamma0, const Mat& frame0, double step)
{
    const int n = profile.dim();
    require(gamma0.size() == n, ErrorKind::invalid_input, "gamma(0) has the wrong dimension");
    detail::check_initial_frame(frame0, n, profile.bound(), step, profile.length());

    FramedCurve fc;
    fc.n = n;
    fc.profile = profile;
    fc.domain = integrate_track([profile](double t) { return profile.domain_generator(t); },
                                profile.length(), gamma0, frame0, step);
    return fc;
}

// Solve the (n+1)-dimensional Darboux system on its own grid.
inline FrameTrack integrate_darboux_track(const CurvatureProfile& profile,
                                          const Vec& gamma0, const Mat& frame0, double step)
{
    const int n = profile.dim();
    require(gamma0.size() == n + 1, ErrorKind::invalid_input,
            "target gamma(0) has the wrong dimension");
    detail::check_initial_frame(frame0, n + 1, profile.bound(), step, profile.length());
    return integrate_track([profile](double t) { return profile.darboux_generator(t); },
                           profile.length(), gamma0, frame0, step);
}

// Attach the Darboux solution to an integrated curve, sharing its grid step.
inline void integrate_darboux_frame(FramedCurve& fc, const Vec& gamma0, const Mat& frame0)
{
    require(!fc.domain.empty(), ErrorKind::precondition_violation,
            "domain frame must be integrated first");
    fc.target = integrate_darboux_track(fc.profile, gamma0, frame0, fc.domain.step);
}

// Default target seed: embed the domain data in the first n coordinates and
// take e_{n+1} as the initial surface normal.
inline void default_target_seed(const FramedCurve& fc, Vec& gamma0, Mat& frame0)
{
    const int n = fc.n;
    gamma0 = Vec::Zero(n + 1);
    gamma0.head(n) = fc.domain.point[0];
    frame0 = Mat::Identity(n + 1, n + 1);
    frame0.topLeftCorner(n, n) = fc.domain.frame[0];
}

} // namespace devim
