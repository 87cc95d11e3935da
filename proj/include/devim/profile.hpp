// profile.hpp -- scalar curvature profiles on [0, length] and the smooth
// generators they induce: the n x n skew matrix driving the domain frame and
// the (n+1) x (n+1) skew matrix driving the Darboux frame.
#pragma once

#include "core.hpp"
#include "quadrature.hpp"

#include <memory>

namespace devim {

using ScalarFn = std::function<double(double)>;

inline ScalarFn constant_fn(double v)
{
    return [v](double) { return v; };
}

// Piecewise-linear interpolant of (t_k, v_k) samples, clamped outside.
inline ScalarFn table_fn(std::vector<double> t, std::vector<double> v)
{
    require(t.size() == v.size() && t.size() >= 2, ErrorKind::invalid_input,
            "table needs at least two samples");
    for (size_t i = 1; i < t.size(); ++i)
        require(t[i] > t[i - 1], ErrorKind::invalid_input, "table times must increase");
    auto ts = std::make_shared<std::vector<double>>(std::move(t));
    auto vs = std::make_shared<std::vector<double>>(std::move(v));
    return [ts, vs](double x) {
        const auto& tt = *ts;
        const auto& vv = *vs;
        if (x <= tt.front()) return vv.front();
        if (x >= tt.back()) return vv.back();
        auto it = std::upper_bound(tt.begin(), tt.end(), x);
        size_t j = size_t(it - tt.begin());
        double a = (x - tt[j - 1]) / (tt[j] - tt[j - 1]);
        return (1.0 - a) * vv[j - 1] + a * vv[j];
    };
}

class CurvatureProfile {
public:
    CurvatureProfile() = default;

    CurvatureProfile(int n, double length, double bound,
                     std::vector<ScalarFn> front,
                     std::vector<ScalarFn> twist,
                     ScalarFn normal)
        : n_(n), length_(length), bound_(bound),
          front_(std::move(front)), twist_(std::move(twist)), normal_(std::move(normal))
    {
        require(n_ >= 2, ErrorKind::invalid_input, "profile dimension must be >= 2");
        require(length_ > 0, ErrorKind::invalid_input, "curve length must be positive");
        require(bound_ > 0, ErrorKind::invalid_input, "curvature bound must be positive");
        require(int(front_.size()) == n_ - 1, ErrorKind::invalid_input,
                "profile needs n-1 front curvatures");
        require(int(twist_.size()) == twist_count(n_), ErrorKind::invalid_input,
                "profile needs (n-1)(n-2)/2 twist curvatures");
        require(bool(normal_), ErrorKind::invalid_input, "normal curvature missing");
    }

    static int twist_count(int n) { return (n - 1) * (n - 2) / 2; }

    // Flat index of the twist pair (i, j), 0 <= i < j <= n-2.
    static int twist_index(int i, int j, int n)
    {
        require(0 <= i && i < j && j <= n - 2, ErrorKind::invalid_input, "bad twist pair");
        int idx = 0;
        for (int a = 0; a < i; ++a) idx += (n - 2 - a);
        return idx + (j - i - 1);
    }

    int dim() const { return n_; }
    double length() const { return length_; }
    double bound() const { return bound_; }

    // Evaluation clamps to [0, length]: endpoint values are one-sided limits.
    double front(int i, double t) const { return front_[i](clamp(t)); }
    double twist(int i, int j, double t) const
    {
        if (i == j) return 0.0;
        if (i < j) return twist_[twist_index(i, j, n_)](clamp(t));
        return -twist_[twist_index(j, i, n_)](clamp(t));
    }
    double normal_curvature(double t) const { return normal_(clamp(t)); }

    const ScalarFn& front_fn(int i) const { return front_[i]; }
    const ScalarFn& twist_fn(int k) const { return twist_[k]; }
    const ScalarFn& normal_fn() const { return normal_; }

    // Row/column order: (gamma', N_1, ..., N_{n-1}).
    Mat domain_generator(double t) const
    {
        Mat K = Mat::Zero(n_, n_);
        for (int i = 0; i < n_ - 1; ++i) {
            double k = front(i, t);
            K(0, i + 1) = k;
            K(i + 1, 0) = -k;
        }
        for (int i = 0; i < n_ - 1; ++i)
            for (int j = i + 1; j < n_ - 1; ++j) {
                double k = twist(i, j, t);
                K(i + 1, j + 1) = k;
                K(j + 1, i + 1) = -k;
            }
        return K;
    }

    // Row/column order: (gamma~', v_1, ..., v_{n-1}, n). The normal couples
    // only to the tangent row.
    Mat darboux_generator(double t) const
    {
        Mat K = Mat::Zero(n_ + 1, n_ + 1);
        K.topLeftCorner(n_, n_) = domain_generator(t);
        double kn = normal_curvature(t);
        K(0, n_) = kn;
        K(n_, 0) = -kn;
        return K;
    }

    CurvatureProfile with_front(std::vector<ScalarFn> front) const
    {
        CurvatureProfile p = *this;
        require(int(front.size()) == n_ - 1, ErrorKind::invalid_input, "front size mismatch");
        p.front_ = std::move(front);
        return p;
    }

    CurvatureProfile with_normal(ScalarFn normal) const
    {
        CurvatureProfile p = *this;
        p.normal_ = std::move(normal);
        return p;
    }

private:
    double clamp(double t) const { return std::min(std::max(t, 0.0), length_); }

    int n_ = 0;
    double length_ = 0;
    double bound_ = 0;
    std::vector<ScalarFn> front_;
    std::vector<ScalarFn> twist_;
    ScalarFn normal_;
};

namespace detail {

// Kernel samples of the standard bump exp(-1/(1-x^2)) at the fixed 32-point
// Gauss-Legendre nodes, with the normalization taken from the same rule so a
// constant input convolves to exactly itself.
struct BumpKernel {
    Quadrature q;
    std::vector<double> k;  // kernel values
    std::vector<double> dk; // kernel derivative values
    double norm = 0;
    BumpKernel()
    {
        q = gauss_legendre(32);
        k.resize(32);
        dk.resize(32);
        for (int i = 0; i < 32; ++i) {
            double x = q.x[i];
            double o = 1.0 - x * x;
            k[i] = std::exp(-1.0 / o);
            dk[i] = k[i] * (-2.0 * x / (o * o));
            norm += q.w[i] * k[i];
        }
    }
};

inline const BumpKernel& bump_kernel()
{
    static const BumpKernel b;
    return b;
}

} // namespace detail

// Convolution with the bump of the given width; the input is extended by its
// endpoint values beyond [lo, hi].
inline ScalarFn mollify_fn(ScalarFn f, double width, double lo, double hi)
{
    require(width > 0, ErrorKind::invalid_input, "mollifier width must be positive");
    return [f = std::move(f), width, lo, hi](double t) {
        const auto& b = detail::bump_kernel();
        double acc = 0;
        for (int i = 0; i < 32; ++i) {
            double tau = t - width * b.q.x[i];
            acc += b.q.w[i] * b.k[i] * f(std::clamp(tau, lo, hi));
        }
        return acc / b.norm;
    };
}

// d/dt of the mollified function, by differentiating the kernel.
inline ScalarFn mollify_fn_derivative(ScalarFn f, double width, double lo, double hi)
{
    require(width > 0, ErrorKind::invalid_input, "mollifier width must be positive");
    return [f = std::move(f), width, lo, hi](double t) {
        const auto& b = detail::bump_kernel();
        double acc = 0;
        for (int i = 0; i < 32; ++i) {
            double tau = t - width * b.q.x[i];
            acc += b.q.w[i] * b.dk[i] * f(std::clamp(tau, lo, hi));
        }
        return acc / (b.norm * width);
    };
}

inline CurvatureProfile mollify_profile_width(const CurvatureProfile& p, double width)
{
    std::vector<ScalarFn> front, twist;
    for (int i = 0; i < p.dim() - 1; ++i)
        front.push_back(mollify_fn(p.front_fn(i), width, 0.0, p.length()));
    for (int k = 0; k < CurvatureProfile::twist_count(p.dim()); ++k)
        twist.push_back(mollify_fn(p.twist_fn(k), width, 0.0, p.length()));
    return CurvatureProfile(p.dim(), p.length(), p.bound(), std::move(front), std::move(twist),
                            mollify_fn(p.normal_fn(), width, 0.0, p.length()));
}

// Smoothing index m >= 1 selects kernel width 1/m.
inline CurvatureProfile mollify_profile(const CurvatureProfile& p, int m)
{
    require(m >= 1, ErrorKind::invalid_input, "smoothing index must be >= 1");
    return mollify_profile_width(p, 1.0 / m);
}

} // namespace devim
