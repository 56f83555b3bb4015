#include "fda/kernels.hpp"

#include <atomic>

namespace fda::kernels {

namespace serial {

void matvec(const Matrix& W, const Vec& x, Vec& y) {
    y.assign(W.rows, 0.0);
    for (std::size_t i = 0; i < W.rows; ++i) {
        const double* wr = W.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < W.cols; ++j) acc += wr[j] * x[j];
        y[i] = acc;
    }
}

void matvec_t_add(const Matrix& W, const Vec& dy, Vec& dx) {
    for (std::size_t j = 0; j < W.cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < W.rows; ++i) acc += W(i, j) * dy[i];
        dx[j] += acc;
    }
}

void outer_add(Matrix& dW, const Vec& dy, const Vec& x) {
    for (std::size_t i = 0; i < dW.rows; ++i) {
        double* gr = dW.row_ptr(i);
        const double d = dy[i];
        for (std::size_t j = 0; j < dW.cols; ++j) gr[j] += d * x[j];
    }
}

}  // namespace serial

namespace par {

void matvec(const Matrix& W, const Vec& x, Vec& y) {
    y.assign(W.rows, 0.0);
    const std::int64_t rows = static_cast<std::int64_t>(W.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* wr = W.row_ptr(static_cast<std::size_t>(i));
        double acc = 0.0;
        for (std::size_t j = 0; j < W.cols; ++j) acc += wr[j] * x[j];
        y[static_cast<std::size_t>(i)] = acc;
    }
}

void matvec_t_add(const Matrix& W, const Vec& dy, Vec& dx) {
    const std::int64_t cols = static_cast<std::int64_t>(W.cols);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < W.rows; ++i)
            acc += W(i, static_cast<std::size_t>(j)) * dy[i];
        dx[static_cast<std::size_t>(j)] += acc;
    }
}

void outer_add(Matrix& dW, const Vec& dy, const Vec& x) {
    const std::int64_t rows = static_cast<std::int64_t>(dW.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        double* gr = dW.row_ptr(static_cast<std::size_t>(i));
        const double d = dy[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < dW.cols; ++j) gr[j] += d * x[j];
    }
}

}  // namespace par

namespace {
std::atomic<bool> g_parallel{true};
}

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

#ifdef _OPENMP
namespace {
inline bool use_par(std::size_t work) {
    return g_parallel.load(std::memory_order_relaxed) && work >= kParallelCutoff;
}
}  // namespace

void matvec(const Matrix& W, const Vec& x, Vec& y) {
    if (use_par(W.size())) par::matvec(W, x, y);
    else serial::matvec(W, x, y);
}
void matvec_t_add(const Matrix& W, const Vec& dy, Vec& dx) {
    if (use_par(W.size())) par::matvec_t_add(W, dy, dx);
    else serial::matvec_t_add(W, dy, dx);
}
void outer_add(Matrix& dW, const Vec& dy, const Vec& x) {
    if (use_par(dW.size())) par::outer_add(dW, dy, x);
    else serial::outer_add(dW, dy, x);
}
#else
void matvec(const Matrix& W, const Vec& x, Vec& y) { serial::matvec(W, x, y); }
void matvec_t_add(const Matrix& W, const Vec& dy, Vec& dx) { serial::matvec_t_add(W, dy, dx); }
void outer_add(Matrix& dW, const Vec& dy, const Vec& x) { serial::outer_add(dW, dy, x); }
#endif

}  // namespace fda::kernels
