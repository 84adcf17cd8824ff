#include <cmath>

#include "sonata/kernels.hpp"

namespace sonata::kernels::scalar {

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale(double a, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * y[i];
}

void lerp(const double* x, const double* target, double t, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + t * (target[i] - x[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t blocked = n - n % 4;
    for (std::size_t i = 0; i < blocked; i += 4) {
        for (std::size_t l = 0; l < 4; ++l) lane[l] = lane[l] + x[i + l] * y[i + l];
    }
    double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (std::size_t i = blocked; i < n; ++i) sum = sum + x[i] * y[i];
    return sum;
}

double squared_distance(const double* x, const double* y, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t blocked = n - n % 4;
    for (std::size_t i = 0; i < blocked; i += 4) {
        for (std::size_t l = 0; l < 4; ++l) {
            const double d = x[i + l] - y[i + l];
            lane[l] = lane[l] + d * d;
        }
    }
    double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (std::size_t i = blocked; i < n; ++i) {
        const double d = x[i] - y[i];
        sum = sum + d * d;
    }
    return sum;
}

double max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
    return m;
}

}  // namespace sonata::kernels::scalar
