#include <immintrin.h>

#include <cmath>

#include "sonata/kernels.hpp"

namespace sonata::kernels::avx2 {

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale(double a, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] = a * y[i];
}

void lerp(const double* x, const double* target, double t, double* out, std::size_t n) {
    const __m256d vt = _mm256_set1_pd(t);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(target + i), vx);
        _mm256_storeu_pd(out + i, _mm256_add_pd(vx, _mm256_mul_pd(vt, diff)));
    }
    for (; i < n; ++i) out[i] = x[i] + t * (target[i] - x[i]);
}

namespace {

double combine_lanes(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    double sum = combine_lanes(acc);
    for (; i < n; ++i) sum = sum + x[i] * y[i];
    return sum;
}

double squared_distance(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double sum = combine_lanes(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        sum = sum + d * d;
    }
    return sum;
}

double max_abs(const double* x, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    double m = std::fmax(std::fmax(lane[0], lane[1]), std::fmax(lane[2], lane[3]));
    for (; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
    return m;
}

}  // namespace sonata::kernels::avx2
