// quadrature.hpp -- Gauss-Legendre rules and unit-direction grids.
#pragma once

#include "core.hpp"

namespace devim {

struct Quadrature {
    std::vector<double> x; // nodes
    std::vector<double> w; // weights
};

// Nodes and weights on [-1,1], computed by Newton iteration on the Legendre
// recurrence. Deterministic; cheap enough to recompute on demand.
inline Quadrature gauss_legendre(int n)
{
    require(n >= 1, ErrorKind::invalid_input, "quadrature order must be >= 1");
    Quadrature q;
    q.x.resize(n);
    q.w.resize(n);
    for (int k = 0; k < n; ++k) {
        double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        q.x[k] = x;
        q.w[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

inline Quadrature mapped(const Quadrature& q, double a, double b)
{
    Quadrature m = q;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (size_t i = 0; i < m.x.size(); ++i) {
        m.x[i] = mid + half * q.x[i];
        m.w[i] = half * q.w[i];
    }
    return m;
}

// Unit vectors in R^dim. dim==1 gives {+1,-1}; dim==2 a uniform circle grid;
// dim==3 a Fibonacci sphere. Grids for dim>=2 contain near-antipodal pairs,
// which is what the sup computations need.
inline std::vector<Vec> sphere_directions(int dim, int count)
{
    require(dim >= 1, ErrorKind::invalid_input, "direction space must have dim >= 1");
    std::vector<Vec> dirs;
    if (dim == 1) {
        Vec p(1), m(1);
        p << 1.0;
        m << -1.0;
        dirs = {p, m};
    } else if (dim == 2) {
        int c = std::max(count, 4);
        dirs.reserve(c);
        for (int k = 0; k < c; ++k) {
            double th = 2.0 * M_PI * k / c;
            Vec d(2);
            d << std::cos(th), std::sin(th);
            dirs.push_back(d);
        }
    } else if (dim == 3) {
        int c = std::max(count, 8);
        dirs.reserve(c);
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < c; ++k) {
            double z = 1.0 - 2.0 * (k + 0.5) / c;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = ga * k;
            Vec d(3);
            d << r * std::cos(th), r * std::sin(th), z;
            dirs.push_back(d);
        }
    } else {
        fail(ErrorKind::invalid_input, "direction grids implemented for dim <= 3");
    }
    return dirs;
}

} // namespace devim
