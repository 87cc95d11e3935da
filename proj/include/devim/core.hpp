// core.hpp -- shared linear algebra helpers and the error taxonomy.
#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace devim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
    invalid_input,
    precondition_violation,
    step_too_coarse,
    not_covered,
    inconsistent_immersion,
    degenerate_geometry,
    margin_violation,
    window_collapsed,
    stage_failure,
    not_glueable,
    invalid_topology,
    insufficient_resolution,
    parse_error,
};

inline const char* name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::invalid_input:          return "invalid-input";
    case ErrorKind::precondition_violation: return "precondition-violation";
    case ErrorKind::step_too_coarse:        return "step-too-coarse";
    case ErrorKind::not_covered:            return "not-covered";
    case ErrorKind::inconsistent_immersion: return "inconsistent-immersion";
    case ErrorKind::degenerate_geometry:    return "degenerate-geometry";
    case ErrorKind::margin_violation:       return "margin-violation";
    case ErrorKind::window_collapsed:       return "window-collapsed";
    case ErrorKind::stage_failure:          return "stage-failure";
    case ErrorKind::not_glueable:           return "not-glueable";
    case ErrorKind::invalid_topology:       return "invalid-topology";
    case ErrorKind::insufficient_resolution:return "insufficient-resolution";
    case ErrorKind::parse_error:            return "parse-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& what)
        : std::runtime_error(std::string(name(k)) + ": " + what), kind(k) {}
    ErrorKind kind;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& what)
{
    throw Error(k, what);
}

inline void require(bool cond, ErrorKind k, const std::string& what)
{
    if (!cond) fail(k, what);
}

// exp(A) by scaling and squaring of a truncated series. The generators here
// are small skew matrices scaled by the step size, so the series converges
// fast after scaling.
inline Mat expm(const Mat& A)
{
    const double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    if (nrm > 0.5) s = int(std::ceil(std::log2(nrm / 0.5)));
    Mat B = A / std::pow(2.0, s);
    Mat term = Mat::Identity(A.rows(), A.cols());
    Mat sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = (term * B) / double(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-19) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// Rows of F are the frame vectors; modified Gram-Schmidt keeps their order,
// so the tangent stays the first row.
inline void orthonormalize_rows(Mat& F)
{
    for (int i = 0; i < F.rows(); ++i) {
        for (int j = 0; j < i; ++j)
            F.row(i) -= F.row(i).dot(F.row(j)) * F.row(j);
        F.row(i) /= F.row(i).norm();
    }
}

inline double orthogonality_defect(const Mat& F)
{
    return (F * F.transpose() - Mat::Identity(F.rows(), F.rows())).cwiseAbs().maxCoeff();
}

inline double max_abs(const Mat& M) { return M.cwiseAbs().maxCoeff(); }

// Worker count used by the chunked loops below. One process-wide knob set by
// the CLI; 1 means serial.
inline int& worker_count()
{
    static int n = 1;
    return n;
}

// Deterministic data parallelism: the chunk decomposition is independent of
// the thread count, and callers reduce per-chunk results in chunk order, so
// outputs are bit-identical for any number of workers.
inline void parallel_chunks(int chunks, const std::function<void(int)>& body)
{
    int threads = std::min(worker_count(), chunks);
    if (threads <= 1) {
        for (int c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int c; (c = next.fetch_add(1)) < chunks;) body(c);
        });
    for (auto& th : pool) th.join();
}

} // namespace devim
