// Timing comparison of the serial and OpenMP kernel paths, with an
// equality check between the two.

#include <chrono>
#include <cstdio>

#include "fda/kernels.hpp"
#include "fda/rng.hpp"

using namespace fda;
using clk = std::chrono::steady_clock;

namespace {

double ms_since(clk::time_point t0) {
    return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clk::now();
        f();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

}  // namespace

int main() {
    Rng rng(42);
    bool all_equal = true;

    std::printf("%8s %14s %14s %8s %s\n", "size", "serial(ms)", "omp(ms)", "speedup", "equal");
    for (std::size_t n : {256, 512, 1024, 2048, 4096}) {
        Matrix W(n, n);
        for (double& v : W.data) v = rng.uniform(-1.0, 1.0);
        Vec x(n);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);

        Vec ys, yp;
        const double ts = time_best_of(5, [&] { kernels::serial::matvec(W, x, ys); });
        const double tp = time_best_of(5, [&] { kernels::par::matvec(W, x, yp); });

        Matrix ds(n, n), dp(n, n);
        const double tso = time_best_of(5, [&] { kernels::serial::outer_add(ds, ys, x); });
        const double tpo = time_best_of(5, [&] { kernels::par::outer_add(dp, ys, x); });

        const bool eq = ys == yp && ds == dp;
        all_equal = all_equal && eq;
        std::printf("%8zu %14.3f %14.3f %7.2fx %s  (matvec)\n", n, ts, tp, ts / tp,
                    eq ? "yes" : "NO");
        std::printf("%8s %14.3f %14.3f %7.2fx %s  (outer_add)\n", "", tso, tpo, tso / tpo,
                    eq ? "yes" : "NO");
    }
    return all_equal ? 0 : 1;
}
