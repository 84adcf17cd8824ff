#pragma once

// Vector kernels used by the mixing and local-update inner loops.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is chosen once at startup from CPU features; setting
// SONATA_SIMD=scalar in the environment forces the reference path.
//
// The AVX2 kernels use separate multiply and add (no FMA) and the reductions
// accumulate in four interleaved lanes combined as (l0 + l1) + (l2 + l3),
// followed by the scalar tail. The scalar reference follows the same order,
// so both paths produce bit-identical results.

#include <cstddef>
#include <span>

namespace sonata::kernels {

enum class Isa { scalar, avx2 };

/// ISA currently used by the dispatched entry points.
Isa active_isa() noexcept;
/// True when the running CPU can execute `isa`.
bool isa_supported(Isa isa) noexcept;
/// Override the dispatch choice. Throws ArgumentError if unsupported.
void force_isa(Isa isa);
const char* isa_name(Isa isa) noexcept;

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y *= a
void scale(double a, std::span<double> y);
/// out = x + t * (target - x)
void lerp(std::span<const double> x, std::span<const double> target, double t,
          std::span<double> out);
double dot(std::span<const double> x, std::span<const double> y);
double squared_distance(std::span<const double> x, std::span<const double> y);
double max_abs(std::span<const double> x);

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* y, std::size_t n);
void lerp(const double* x, const double* target, double t, double* out, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace scalar

#if defined(SONATA_HAVE_AVX2)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* y, std::size_t n);
void lerp(const double* x, const double* target, double t, double* out, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace sonata::kernels
