// analyzer.hpp -- empirical developability checks on sampled maps: finite
// difference derivative fields, isometry residuals, the generalized cross
// product normal, the second fundamental form with its rank-1 and Codazzi
// defects, ruling detection with body/arm partitioning, and the critical
// exponent probe on cone-like singularities.
#pragma once

#include "core.hpp"
#include "immersion.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>

namespace devim {

// Values of a map on a regular lattice masked to the sampled region. Node
// (i_0,...,i_{n-1}) sits at origin + h * i.
struct SampledMap {
    int n = 0;
    double h = 0;
    Vec origin;
    std::vector<int> shape;     // nodes per axis
    std::vector<int32_t> slot;  // lattice -> dense index, -1 outside the mask
    std::vector<double> values; // node_count x (n+1), row-major per node
    long node_count = 0;

    long lattice_size() const
    {
        long s = 1;
        for (int d : shape) s *= d;
        return s;
    }

    long flat(const std::vector<int>& idx) const
    {
        long f = 0;
        for (int d = 0; d < n; ++d) f = f * shape[d] + idx[d];
        return f;
    }

    bool in_lattice(const std::vector<int>& idx) const
    {
        for (int d = 0; d < n; ++d)
            if (idx[d] < 0 || idx[d] >= shape[d]) return false;
        return true;
    }

    int32_t slot_at(const std::vector<int>& idx) const
    {
        return in_lattice(idx) ? slot[flat(idx)] : -1;
    }

    Vec coord(const std::vector<int>& idx) const
    {
        Vec x = origin;
        for (int d = 0; d < n; ++d) x[d] += h * idx[d];
        return x;
    }

    Eigen::Map<const Vec> value(int32_t s) const
    {
        return Eigen::Map<const Vec>(values.data() + long(s) * (n + 1), n + 1);
    }

    // Iterate masked nodes with their lattice index.
    template <typename F>
    void for_nodes(F&& f) const
    {
        std::vector<int> idx(n, 0);
        for (long flatpos = 0; flatpos < lattice_size(); ++flatpos) {
            int32_t s = slot[flatpos];
            if (s >= 0) f(idx, s);
            for (int d = n - 1; d >= 0; --d) {
                if (++idx[d] < shape[d]) break;
                idx[d] = 0;
            }
        }
    }

    static SampledMap from_function(const Vec& lo, const Vec& hi, double h,
                                    const std::function<bool(const Vec&)>& inside,
                                    const std::function<Vec(const Vec&)>& fn)
    {
        require(h > 0, ErrorKind::invalid_input, "lattice spacing must be positive");
        SampledMap m;
        m.n = int(lo.size());
        m.h = h;
        m.origin = lo;
        m.shape.resize(m.n);
        for (int d = 0; d < m.n; ++d)
            m.shape[d] = std::max(1, int(std::floor((hi[d] - lo[d]) / h)) + 1);
        m.slot.assign(m.lattice_size(), -1);
        std::vector<int> idx(m.n, 0);
        for (long f = 0; f < m.lattice_size(); ++f) {
            Vec x = m.coord(idx);
            if (inside(x)) {
                m.slot[f] = int32_t(m.node_count++);
                Vec v = fn(x);
                for (int c = 0; c <= m.n; ++c) m.values.push_back(v[c]);
            }
            for (int d = m.n - 1; d >= 0; --d) {
                if (++idx[d] < m.shape[d]) break;
                idx[d] = 0;
            }
        }
        return m;
    }

    static SampledMap from_immersion(const DevelopableImmersion& imm, double h)
    {
        auto [lo, hi] = imm.domain().bounding_box();
        return from_function(lo, hi, h,
                             [&](const Vec& x) { return imm.covered(x); },
                             [&](const Vec& x) { return imm.evaluate_at(x); });
    }
};

// Finite-difference derivative fields. grad is second-order central in the
// interior; one-sided first-order stencils are used near the mask edge and
// those nodes carry the boundary-layer flag. hess uses the symmetrized
// second-difference stencil and is only trusted on interior nodes.
struct FieldEstimate {
    int n = 0;
    std::vector<double> grad;     // node x (n+1) x n
    std::vector<double> hess;     // node x n x n x (n+1)
    std::vector<uint8_t> interior;

    Eigen::Map<const Mat> grad_at(long s) const
    {
        return Eigen::Map<const Mat>(grad.data() + s * (n + 1) * n, n + 1, n);
    }

    // Hessian slice l as an n x n matrix for node s.
    Mat hess_slice(long s, int l) const
    {
        Mat H(n, n);
        const double* base = hess.data() + ((s * n) * n) * (n + 1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) H(i, j) = base[(long(i) * n + j) * (n + 1) + l];
        return H;
    }

    double hess_entry(long s, int i, int j, int l) const
    {
        return hess[((s * n + i) * long(n) + j) * (n + 1) + l];
    }
};

inline FieldEstimate estimate_fields(const SampledMap& m)
{
    FieldEstimate fe;
    fe.n = m.n;
    fe.grad.assign(m.node_count * (m.n + 1) * m.n, 0.0);
    fe.hess.assign(m.node_count * m.n * m.n * (m.n + 1), 0.0);
    fe.interior.assign(m.node_count, 0);

    const int n = m.n;
    const double h = m.h;
    long interior_count = 0;

    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        std::vector<int> nb = idx;
        std::array<int32_t, 8> ax_p{}, ax_m{};
        bool inner = true;
        for (int d = 0; d < n; ++d) {
            nb[d] = idx[d] + 1;
            ax_p[d] = m.slot_at(nb);
            nb[d] = idx[d] - 1;
            ax_m[d] = m.slot_at(nb);
            nb[d] = idx[d];
            if (ax_p[d] < 0 || ax_m[d] < 0) inner = false;
        }

        // gradient, stored column-major per node so grad_at can map it
        for (int d = 0; d < n; ++d) {
            Vec g(n + 1);
            if (ax_p[d] >= 0 && ax_m[d] >= 0)
                g = (m.value(ax_p[d]) - m.value(ax_m[d])) / (2.0 * h);
            else if (ax_p[d] >= 0)
                g = (m.value(ax_p[d]) - m.value(s)) / h;
            else if (ax_m[d] >= 0)
                g = (m.value(s) - m.value(ax_m[d])) / h;
            else
                g.setZero();
            for (int c = 0; c <= n; ++c)
                fe.grad[long(s) * (n + 1) * n + long(d) * (n + 1) + c] = g[c];
        }

        // second differences: same-axis and symmetric mixed stencils
        bool mixed_ok = inner;
        for (int i = 0; i < n && mixed_ok; ++i)
            for (int j = i + 1; j < n && mixed_ok; ++j) {
                nb[i] = idx[i] + 1; nb[j] = idx[j] + 1;
                if (m.slot_at(nb) < 0) mixed_ok = false;
                nb[j] = idx[j] - 1;
                if (m.slot_at(nb) < 0) mixed_ok = false;
                nb[i] = idx[i] - 1;
                if (m.slot_at(nb) < 0) mixed_ok = false;
                nb[j] = idx[j] + 1;
                if (m.slot_at(nb) < 0) mixed_ok = false;
                nb[i] = idx[i]; nb[j] = idx[j];
            }

        if (inner && mixed_ok) {
            fe.interior[s] = 1;
            ++interior_count;
            for (int i = 0; i < n; ++i) {
                Vec dii = (m.value(ax_p[i]) - 2.0 * m.value(s) + m.value(ax_m[i])) / (h * h);
                for (int c = 0; c <= n; ++c)
                    fe.hess[((long(s) * n + i) * n + i) * (n + 1) + c] = dii[c];
            }
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    nb[i] = idx[i] + 1; nb[j] = idx[j] + 1;
                    int32_t pp = m.slot_at(nb);
                    nb[j] = idx[j] - 1;
                    int32_t pm = m.slot_at(nb);
                    nb[i] = idx[i] - 1;
                    int32_t mm = m.slot_at(nb);
                    nb[j] = idx[j] + 1;
                    int32_t mp = m.slot_at(nb);
                    nb[i] = idx[i]; nb[j] = idx[j];
                    Vec dij = (m.value(pp) - m.value(pm) - m.value(mp) + m.value(mm)) /
                              (4.0 * h * h);
                    for (int c = 0; c <= n; ++c) {
                        fe.hess[((long(s) * n + i) * n + j) * (n + 1) + c] = dij[c];
                        fe.hess[((long(s) * n + j) * n + i) * (n + 1) + c] = dij[c];
                    }
                }
        }
    });

    require(interior_count > 0, ErrorKind::insufficient_resolution,
            "no interior node admits the full difference stencil; refine the lattice");
    return fe;
}

struct ResidualField {
    std::vector<double> value; // per node, max-norm of grad^T grad - I
    double max_interior = 0;
};

inline ResidualField isometry_residual(const SampledMap& m, const FieldEstimate& fe)
{
    ResidualField rf;
    rf.value.assign(m.node_count, 0.0);
    for (long s = 0; s < m.node_count; ++s) {
        Mat G = fe.grad_at(s);
        rf.value[s] = max_abs(G.transpose() * G - Mat::Identity(m.n, m.n));
        if (fe.interior[s]) rf.max_interior = std::max(rf.max_interior, rf.value[s]);
    }
    return rf;
}

struct NormalField {
    std::vector<double> normal; // node x (n+1), normalized
    std::vector<double> raw_norm;
    std::vector<uint8_t> degenerate;

    Eigen::Map<const Vec> at(long s, int n) const
    {
        return Eigen::Map<const Vec>(normal.data() + s * (n + 1), n + 1);
    }
};

// Generalized cross product of the gradient columns by cofactor expansion;
// oriented so that (u_{,1},...,u_{,n}, normal) is a positive basis.
inline Vec cross_columns(const Mat& G)
{
    const int n = int(G.cols());
    Vec c(n + 1);
    Mat minor(n, n);
    for (int l = 0; l <= n; ++l) {
        int r = 0;
        for (int row = 0; row <= n; ++row) {
            if (row == l) continue;
            minor.row(r++) = G.row(row);
        }
        c[l] = ((l % 2 == 0) ? 1.0 : -1.0) * minor.determinant();
    }
    // det[xi, u_1, ..., u_n] = xi . c; flip for odd n so the basis that ends
    // with the normal is positive.
    if (n % 2 == 1) c = -c;
    return c;
}

inline NormalField normal_field(const SampledMap& m, const FieldEstimate& fe)
{
    NormalField nf;
    nf.normal.assign(m.node_count * (m.n + 1), 0.0);
    nf.raw_norm.assign(m.node_count, 0.0);
    nf.degenerate.assign(m.node_count, 0);
    for (long s = 0; s < m.node_count; ++s) {
        Vec c = cross_columns(fe.grad_at(s));
        double nrm = c.norm();
        nf.raw_norm[s] = nrm;
        if (nrm < 1e-8) {
            nf.degenerate[s] = 1;
            continue;
        }
        c /= nrm;
        for (int l = 0; l <= m.n; ++l) nf.normal[s * (m.n + 1) + l] = c[l];
    }
    return nf;
}

struct SecondFormField {
    std::vector<double> A; // node x n x n
    double max_sym_defect = 0;
    double max_minor = 0;   // max 2x2 minor over interior nodes
    double max_codazzi = 0; // max |d_k A_ij - d_j A_ik| over interior nodes

    Mat at(long s, int n) const
    {
        Mat M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = A[(s * n + i) * n + j];
        return M;
    }
};

inline SecondFormField second_form_field(const SampledMap& m, const FieldEstimate& fe,
                                         const NormalField& nf)
{
    const int n = m.n;
    SecondFormField sf;
    sf.A.assign(m.node_count * n * n, 0.0);
    for (long s = 0; s < m.node_count; ++s) {
        if (!fe.interior[s] || nf.degenerate[s]) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double a = 0;
                for (int l = 0; l <= n; ++l)
                    a += fe.hess_entry(s, i, j, l) * nf.normal[s * (n + 1) + l];
                sf.A[(s * n + i) * n + j] = a;
            }
        Mat A = sf.at(s, n);
        sf.max_sym_defect = std::max(sf.max_sym_defect, max_abs(A - A.transpose()));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        sf.max_minor = std::max(sf.max_minor,
                                                std::abs(A(i, j) * A(k, l) - A(i, l) * A(k, j)));
    }

    // discrete Codazzi defect by central differences of the A field
    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        if (!fe.interior[s]) return;
        std::vector<int> nb = idx;
        auto dA = [&](int i, int j, int k) -> double {
            nb[k] = idx[k] + 1;
            int32_t p = m.slot_at(nb);
            nb[k] = idx[k] - 1;
            int32_t q = m.slot_at(nb);
            nb[k] = idx[k];
            if (p < 0 || q < 0 || !fe.interior[p] || !fe.interior[q])
                return std::numeric_limits<double>::quiet_NaN();
            return (sf.A[(long(p) * n + i) * n + j] - sf.A[(long(q) * n + i) * n + j]) /
                   (2.0 * m.h);
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    double d = dA(i, j, k) - dA(i, k, j);
                    if (std::isfinite(d)) sf.max_codazzi = std::max(sf.max_codazzi, std::abs(d));
                }
    });
    return sf;
}

enum class NodeLabel : uint8_t { boundary_layer = 0, flat = 1, ruled = 2, noisy = 3 };

struct RulingPartition {
    std::vector<NodeLabel> label;
    std::vector<int> cluster;          // flat-body id or ruling-plane id, -1 otherwise
    std::vector<double> direction;     // node x n, unit normal of the constancy plane
    double tau_flat = 0;
    double tau_ruling = 0;

    struct Body {
        int id = 0;
        long nodes = 0;
        int adjacent_planes = 0;
        bool proper = false; // boundary meets more than two detected planes
    };
    std::vector<Body> bodies;

    struct PlaneCluster {
        int id = 0;
        long nodes = 0;
        Vec mean_normal;
    };
    std::vector<PlaneCluster> planes;
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(long n) : parent(n)
    {
        for (long i = 0; i < n; ++i) parent[i] = int(i);
    }
    int find(int a)
    {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace detail

// Classify nodes into affine bodies and ruled points. Ruled nodes carry the
// unit normal of the hyperplane along which the gradient is constant (the top
// right-singular direction of A); the constancy is verified by walking the
// plane's chart directions to the mask edge. Thresholds are data-driven and
// reported in the output.
inline RulingPartition detect_rulings(const SampledMap& m, const FieldEstimate& fe,
                                      const ResidualField& rf, const SecondFormField& sf,
                                      double angular_tol = 2e-2)
{
    const int n = m.n;
    require(rf.max_interior <= 0.1, ErrorKind::precondition_violation,
            "isometry residual too large for ruling detection");

    RulingPartition rp;
    rp.label.assign(m.node_count, NodeLabel::boundary_layer);
    rp.cluster.assign(m.node_count, -1);
    rp.direction.assign(m.node_count * n, 0.0);

    // tau_flat = 10 x (median |A| of the lowest decile), floored at 1e-6 and
    // capped at a tenth of the largest |A| so an everywhere-curved map does
    // not read its own curvature as the noise floor.
    std::vector<double> norms;
    norms.reserve(m.node_count);
    for (long s = 0; s < m.node_count; ++s)
        if (fe.interior[s]) norms.push_back(sf.at(s, n).norm());
    std::sort(norms.begin(), norms.end());
    double med_low = norms.empty() ? 0.0 : norms[std::max<size_t>(1, norms.size() / 10) / 2];
    double cap = norms.empty() ? 1.0 : 0.1 * norms.back();
    rp.tau_flat = std::max(std::min(10.0 * med_low, cap), 1e-6);

    double maxA = norms.empty() ? 0.0 : norms.back();
    rp.tau_ruling = 1e-3 * std::max(1.0, maxA);

    // per-node classification + ruling direction
    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        if (!fe.interior[s]) return;
        Mat A = sf.at(s, n);
        if (A.norm() <= rp.tau_flat) {
            rp.label[s] = NodeLabel::flat;
            return;
        }
        Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
        Vec v = svd.matrixV().col(0);
        int lead = 0;
        for (int d = 1; d < n; ++d)
            if (std::abs(v[d]) > std::abs(v[lead])) lead = d;
        if (v[lead] < 0) v = -v;

        // verify gradient constancy along the plane's chart directions; the
        // lattice walk strays up to ~h/2 off the true plane, so the local
        // tolerance scales with the gradient's local Lipschitz constant
        Mat G0 = fe.grad_at(s);
        double tau_local = std::max(rp.tau_ruling, 3.0 * m.h * A.norm());
        bool ok = true;
        for (int d = 0; d < n && ok; ++d) {
            Vec e = Vec::Unit(n, d);
            Vec dirp = e - e.dot(v) * v;
            if (dirp.norm() < 0.5) continue; // nearly parallel to the normal
            dirp /= dirp.norm();
            for (int sgn : {+1, -1}) {
                std::vector<int> cur = idx;
                for (int stepn = 1;; ++stepn) {
                    for (int dd = 0; dd < n; ++dd)
                        cur[dd] = idx[dd] + int(std::llround(sgn * stepn * dirp[dd]));
                    int32_t q = m.slot_at(cur);
                    if (q < 0) break;
                    if (!fe.interior[q]) continue; // fringe estimates are one-sided
                    if ((fe.grad_at(q) - G0).norm() > tau_local) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
        }
        rp.label[s] = ok ? NodeLabel::ruled : NodeLabel::noisy;
        if (ok)
            for (int d = 0; d < n; ++d) rp.direction[long(s) * n + d] = v[d];
    });

    // connected components of flat nodes; ruled nodes merge into direction
    // clusters over lattice adjacency with the angular tolerance
    detail::UnionFind uf(m.node_count);
    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        if (rp.label[s] != NodeLabel::flat && rp.label[s] != NodeLabel::ruled) return;
        std::vector<int> nb = idx;
        for (int d = 0; d < n; ++d) {
            nb[d] = idx[d] + 1;
            int32_t q = m.slot_at(nb);
            nb[d] = idx[d];
            if (q < 0 || rp.label[q] != rp.label[s]) continue;
            if (rp.label[s] == NodeLabel::flat) {
                uf.unite(s, q);
            } else {
                Eigen::Map<const Vec> va(rp.direction.data() + long(s) * n, n);
                Eigen::Map<const Vec> vb(rp.direction.data() + long(q) * n, n);
                double ang = std::acos(std::min(1.0, std::abs(va.dot(vb))));
                if (ang <= angular_tol) uf.unite(s, q);
            }
        }
    });

    // compress component ids
    std::map<int, int> flat_ids, plane_ids;
    for (long s = 0; s < m.node_count; ++s) {
        if (rp.label[s] == NodeLabel::flat) {
            int r = uf.find(int(s));
            rp.cluster[s] = flat_ids.try_emplace(r, int(flat_ids.size())).first->second;
        } else if (rp.label[s] == NodeLabel::ruled) {
            int r = uf.find(int(s));
            rp.cluster[s] = plane_ids.try_emplace(r, int(plane_ids.size())).first->second;
        }
    }

    rp.bodies.resize(flat_ids.size());
    for (size_t i = 0; i < flat_ids.size(); ++i) rp.bodies[i].id = int(i);
    rp.planes.resize(plane_ids.size());
    for (size_t i = 0; i < plane_ids.size(); ++i) {
        rp.planes[i].id = int(i);
        rp.planes[i].mean_normal = Vec::Zero(n);
    }
    // Bodies count adjacent *planes*, not direction clusters: neighbouring
    // ruled nodes are bucketed by (cluster, offset along the cluster normal).
    std::vector<std::set<std::pair<int, long>>> adj(flat_ids.size());
    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        if (rp.label[s] == NodeLabel::ruled) {
            auto& pc = rp.planes[rp.cluster[s]];
            ++pc.nodes;
            Eigen::Map<const Vec> v(rp.direction.data() + long(s) * n, n);
            if (pc.mean_normal.dot(v) < 0) pc.mean_normal -= v;
            else pc.mean_normal += v;
            return;
        }
        if (rp.label[s] != NodeLabel::flat) return;
        ++rp.bodies[rp.cluster[s]].nodes;
        std::vector<int> nb = idx;
        for (int d = 0; d < n; ++d)
            for (int sgn : {+1, -1}) {
                nb[d] = idx[d] + sgn;
                int32_t q = m.slot_at(nb);
                if (q >= 0 && rp.label[q] == NodeLabel::ruled) {
                    Eigen::Map<const Vec> v(rp.direction.data() + long(q) * n, n);
                    double off = v.dot(m.coord(nb));
                    adj[rp.cluster[s]].insert(
                        {rp.cluster[q], std::llround(off / (4.0 * m.h))});
                }
                nb[d] = idx[d];
            }
    });
    for (auto& pc : rp.planes)
        if (pc.nodes > 0) pc.mean_normal.normalize();
    for (auto& b : rp.bodies) {
        b.adjacent_planes = int(adj[b.id].size());
        b.proper = b.adjacent_planes > 2;
    }
    return rp;
}

struct ProbeResult {
    double p = 0;
    std::vector<double> eps;
    std::vector<double> integral;   // I_p(eps_k)
    std::vector<double> increments; // I(eps_{k+1}) - I(eps_k)
    std::vector<double> ratios;
    std::string verdict;            // "converges" or "diverges"
};

// I_p(eps) = sum over interior nodes with |x - apex| > eps of |hess u|^p h^n.
// The verdict reads the tail of the increment ratios: geometric decay below
// 0.7 means the integral is Cauchy; otherwise the increments persist and the
// integral diverges as eps -> 0.
inline ProbeResult sharpness_probe(const SampledMap& m, const FieldEstimate& fe,
                                   const Vec& apex, double p,
                                   std::vector<double> eps_schedule)
{
    require(p > 1.0 && p < 3.0, ErrorKind::invalid_input, "probe exponent must be in (1,3)");
    require(eps_schedule.size() >= 3, ErrorKind::invalid_input,
            "probe schedule needs at least three radii");
    for (size_t i = 1; i < eps_schedule.size(); ++i)
        require(eps_schedule[i] < eps_schedule[i - 1], ErrorKind::invalid_input,
                "probe schedule must decrease");
    require(eps_schedule.back() >= 4.0 * m.h, ErrorKind::insufficient_resolution,
            "probe radius below 4h; minimum usable h is eps_min / 4");

    ProbeResult pr;
    pr.p = p;
    pr.eps = eps_schedule;
    const int n = m.n;
    double cell = std::pow(m.h, n);

    std::vector<double> radius(m.node_count, 0.0);
    std::vector<double> weight(m.node_count, 0.0);
    m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
        radius[s] = (m.coord(idx) - apex).norm();
        if (!fe.interior[s]) return;
        double h2 = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l <= n; ++l) {
                    double v = fe.hess_entry(s, i, j, l);
                    h2 += v * v;
                }
        weight[s] = std::pow(h2, 0.5 * p) * cell;
    });

    for (double eps : eps_schedule) {
        double acc = 0;
        for (long s = 0; s < m.node_count; ++s)
            if (radius[s] > eps) acc += weight[s];
        pr.integral.push_back(acc);
    }
    for (size_t k = 1; k < pr.integral.size(); ++k)
        pr.increments.push_back(pr.integral[k] - pr.integral[k - 1]);
    for (size_t k = 1; k < pr.increments.size(); ++k)
        pr.ratios.push_back(pr.increments[k] / pr.increments[k - 1]);

    size_t tail = std::min<size_t>(3, pr.ratios.size());
    double worst = 0;
    for (size_t k = pr.ratios.size() - tail; k < pr.ratios.size(); ++k)
        worst = std::max(worst, pr.ratios[k]);
    pr.verdict = worst < 0.7 ? "converges" : "diverges";
    return pr;
}

} // namespace devim
