#pragma once

#include "fda/tensor.hpp"

// Dense inner loops shared by the forward and backward passes. Each kernel
// exists twice: a serial reference in kernels::serial and an OpenMP version
// in kernels::par. The top-level functions dispatch on a runtime switch and
// a size cutoff. Parallelisation is over independent output rows/columns,
// so both versions produce bit-identical results.

namespace fda::kernels {

namespace serial {
void matvec(const Matrix& W, const Vec& x, Vec& y);              // y = W x
void matvec_t_add(const Matrix& W, const Vec& dy, Vec& dx);      // dx += W^T dy
void outer_add(Matrix& dW, const Vec& dy, const Vec& x);         // dW += dy x^T
}  // namespace serial

namespace par {
void matvec(const Matrix& W, const Vec& x, Vec& y);
void matvec_t_add(const Matrix& W, const Vec& dy, Vec& dx);
void outer_add(Matrix& dW, const Vec& dy, const Vec& x);
}  // namespace par

void set_parallel(bool enabled);
bool parallel_enabled();

// Below this many matrix entries the serial path is always taken.
inline constexpr std::size_t kParallelCutoff = 16384;

void matvec(const Matrix& W, const Vec& x, Vec& y);
void matvec_t_add(const Matrix& W, const Vec& dy, Vec& dx);
void outer_add(Matrix& dW, const Vec& dy, const Vec& x);

}  // namespace fda::kernels
