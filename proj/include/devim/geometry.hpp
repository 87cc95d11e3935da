// geometry.hpp -- bounded convex domains with analytic containment,
// boundary-distance and diameter queries. Shapes are represented by closed
// formulas, not meshes, so the ray distances are machine precision and vary
// continuously with the query.
#pragma once

#include "core.hpp"
#include "quadrature.hpp"

namespace devim {

enum class ShapeKind { ball, ellipsoid, superellipsoid, polytope };

class ConvexDomain {
public:
    static ConvexDomain ball(Vec center, double radius)
    {
        require(radius > 0, ErrorKind::invalid_input, "ball radius must be positive");
        require(center.size() >= 2, ErrorKind::invalid_input, "dimension must be >= 2");
        ConvexDomain d;
        d.kind_ = ShapeKind::ball;
        d.center_ = std::move(center);
        d.radii_ = Vec::Constant(d.center_.size(), radius);
        return d;
    }

    static ConvexDomain ellipsoid(Vec center, Vec radii)
    {
        require(center.size() == radii.size() && center.size() >= 2,
                ErrorKind::invalid_input, "center/radii size mismatch");
        require(radii.minCoeff() > 0, ErrorKind::invalid_input, "radii must be positive");
        ConvexDomain d;
        d.kind_ = ShapeKind::ellipsoid;
        d.center_ = std::move(center);
        d.radii_ = std::move(radii);
        return d;
    }

    // |x1/r1|^p + ... + |xn/rn|^p < 1. C^1 boundary for p > 1.
    static ConvexDomain superellipsoid(Vec center, Vec radii, double exponent)
    {
        require(center.size() == radii.size() && center.size() >= 2,
                ErrorKind::invalid_input, "center/radii size mismatch");
        require(radii.minCoeff() > 0, ErrorKind::invalid_input, "radii must be positive");
        require(exponent > 1.0, ErrorKind::invalid_input,
                "superellipsoid exponent must be > 1 for a C1 boundary");
        ConvexDomain d;
        d.kind_ = ShapeKind::superellipsoid;
        d.center_ = std::move(center);
        d.radii_ = std::move(radii);
        d.exponent_ = exponent;
        return d;
    }

    // Axis-aligned box as a polytope.
    static ConvexDomain box(Vec center, Vec half_widths)
    {
        const int n = int(center.size());
        require(n == half_widths.size() && n >= 2, ErrorKind::invalid_input,
                "center/half-width size mismatch");
        require(half_widths.minCoeff() > 0, ErrorKind::invalid_input,
                "half-widths must be positive");
        ConvexDomain d;
        d.kind_ = ShapeKind::polytope;
        d.center_ = center;
        d.radii_ = half_widths;
        d.normals_.resize(2 * n, n);
        d.offsets_.resize(2 * n);
        d.normals_.setZero();
        for (int i = 0; i < n; ++i) {
            d.normals_(2 * i, i) = 1.0;
            d.offsets_(2 * i) = center[i] + half_widths[i];
            d.normals_(2 * i + 1, i) = -1.0;
            d.offsets_(2 * i + 1) = -(center[i] - half_widths[i]);
        }
        // vertices: all corners
        const int corners = 1 << n;
        for (int c = 0; c < corners; ++c) {
            Vec v = center;
            for (int i = 0; i < n; ++i)
                v[i] += (c & (1 << i)) ? half_widths[i] : -half_widths[i];
            d.vertices_.push_back(v);
        }
        return d;
    }

    // Planar convex polygon from its vertex list (any order).
    static ConvexDomain polytope2d(std::vector<Vec> vertices)
    {
        require(vertices.size() >= 3, ErrorKind::invalid_input,
                "polytope needs at least 3 vertices");
        for (auto& v : vertices)
            require(v.size() == 2, ErrorKind::invalid_input, "polytope2d expects 2d vertices");
        Vec c = Vec::Zero(2);
        for (auto& v : vertices) c += v;
        c /= double(vertices.size());
        std::sort(vertices.begin(), vertices.end(), [&](const Vec& a, const Vec& b) {
            return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
        });
        ConvexDomain d;
        d.kind_ = ShapeKind::polytope;
        d.center_ = c;
        d.vertices_ = vertices;
        const int m = int(vertices.size());
        d.normals_.resize(m, 2);
        d.offsets_.resize(m);
        for (int i = 0; i < m; ++i) {
            Vec p = vertices[i], q = vertices[(i + 1) % m];
            Vec e = q - p;
            require(e.norm() > 1e-14, ErrorKind::invalid_input, "degenerate polytope edge");
            Vec nrm(2);
            nrm << e[1], -e[0]; // outward for counterclockwise order
            nrm /= nrm.norm();
            if (nrm.dot(c - p) > 0) nrm = -nrm;
            d.normals_.row(i) = nrm.transpose();
            d.offsets_[i] = nrm.dot(p);
        }
        return d;
    }

    int dim() const { return int(center_.size()); }
    ShapeKind kind() const { return kind_; }
    bool smooth_boundary() const { return kind_ != ShapeKind::polytope; }
    const Vec& center() const { return center_; }

    // Convex level function: negative inside, zero on the boundary.
    double inside_value(const Vec& x) const
    {
        check_dim(x);
        switch (kind_) {
        case ShapeKind::ball:
            return (x - center_).norm() - radii_[0];
        case ShapeKind::ellipsoid: {
            Vec y = (x - center_).cwiseQuotient(radii_);
            return y.norm() - 1.0;
        }
        case ShapeKind::superellipsoid: {
            double acc = 0;
            for (int i = 0; i < dim(); ++i)
                acc += std::pow(std::abs((x[i] - center_[i]) / radii_[i]), exponent_);
            return std::pow(acc, 1.0 / exponent_) - 1.0;
        }
        case ShapeKind::polytope: {
            double worst = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < normals_.rows(); ++i)
                worst = std::max(worst, normals_.row(i).dot(x) - offsets_[i]);
            return worst;
        }
        }
        return 0;
    }

    bool contains(const Vec& x) const { return inside_value(x) < 0.0; }

    // sup{ S >= 0 : x + S dir in the open domain }. The direction must be a
    // unit vector to 1e-12; it is renormalized before use.
    double boundary_distance(const Vec& x, const Vec& dir_in) const
    {
        check_dim(x);
        check_dim(dir_in);
        require(std::abs(dir_in.norm() - 1.0) <= 1e-12, ErrorKind::invalid_input,
                "direction must be a unit vector to 1e-12");
        require(contains(x), ErrorKind::precondition_violation,
                "boundary-distance base point is outside the domain");
        Vec dir = dir_in / dir_in.norm();

        switch (kind_) {
        case ShapeKind::ball: {
            Vec y = x - center_;
            double b = y.dot(dir), c = y.squaredNorm() - radii_[0] * radii_[0];
            return -b + std::sqrt(std::max(0.0, b * b - c));
        }
        case ShapeKind::ellipsoid: {
            Vec y = (x - center_).cwiseQuotient(radii_);
            Vec e = dir.cwiseQuotient(radii_);
            double a = e.squaredNorm(), b = y.dot(e), c = y.squaredNorm() - 1.0;
            return (-b + std::sqrt(std::max(0.0, b * b - a * c))) / a;
        }
        case ShapeKind::superellipsoid: {
            // inside_value is convex along the ray and negative at S=0;
            // bracket then bisect.
            double hi = radii_.maxCoeff();
            while (inside_value(x + hi * dir) < 0.0) hi *= 2.0;
            double lo = 0.0;
            for (int it = 0; it < 90; ++it) {
                double mid = 0.5 * (lo + hi);
                (inside_value(x + mid * dir) < 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        case ShapeKind::polytope: {
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < normals_.rows(); ++i) {
                double ad = normals_.row(i).dot(dir);
                if (ad > 1e-15)
                    best = std::min(best, (offsets_[i] - normals_.row(i).dot(x)) / ad);
            }
            return best;
        }
        }
        return 0;
    }

    double diameter() const
    {
        switch (kind_) {
        case ShapeKind::ball:
            return 2.0 * radii_[0];
        case ShapeKind::ellipsoid:
            return 2.0 * radii_.maxCoeff();
        case ShapeKind::superellipsoid: {
            // centrally symmetric: diameter = 2 max radial extent, scanned
            // over a fixed direction grid with a local golden refine.
            auto dirs = sphere_directions(dim(), 4096);
            double best = 0;
            Vec bestd = dirs[0];
            for (auto& d : dirs) {
                double r = boundary_distance(center_, d);
                if (r > best) { best = r; bestd = d; }
            }
            if (dim() == 2) {
                double th = std::atan2(bestd[1], bestd[0]);
                double a = th - 2.0 * M_PI / 4096, b = th + 2.0 * M_PI / 4096;
                const double g = (std::sqrt(5.0) - 1.0) / 2.0;
                auto val = [&](double t) {
                    Vec d(2);
                    d << std::cos(t), std::sin(t);
                    return boundary_distance(center_, d);
                };
                double x1 = b - g * (b - a), x2 = a + g * (b - a);
                double f1 = val(x1), f2 = val(x2);
                for (int it = 0; it < 60; ++it) {
                    if (f1 < f2) { a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = val(x2); }
                    else { b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = val(x1); }
                }
                best = std::max(best, std::max(f1, f2));
            }
            return 2.0 * best;
        }
        case ShapeKind::polytope: {
            double best = 0;
            for (size_t i = 0; i < vertices_.size(); ++i)
                for (size_t j = i + 1; j < vertices_.size(); ++j)
                    best = std::max(best, (vertices_[i] - vertices_[j]).norm());
            return best;
        }
        }
        return 0;
    }

    std::pair<Vec, Vec> bounding_box() const
    {
        if (kind_ == ShapeKind::polytope) {
            Vec lo = vertices_[0], hi = vertices_[0];
            for (auto& v : vertices_) {
                lo = lo.cwiseMin(v);
                hi = hi.cwiseMax(v);
            }
            return {lo, hi};
        }
        return {center_ - radii_, center_ + radii_};
    }

    const std::vector<Vec>& vertices() const { return vertices_; }

private:
    void check_dim(const Vec& x) const
    {
        require(x.size() == center_.size(), ErrorKind::invalid_input,
                "point dimension does not match the domain");
    }

    ShapeKind kind_ = ShapeKind::ball;
    Vec center_;
    Vec radii_;
    double exponent_ = 2.0;
    Mat normals_;        // polytope halfspaces a.x <= b
    Vec offsets_;
    std::vector<Vec> vertices_;
};

} // namespace devim
