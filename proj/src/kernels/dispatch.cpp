#include <atomic>
#include <cstdlib>
#include <string_view>

#include "sonata/errors.hpp"
#include "sonata/kernels.hpp"

namespace sonata::kernels {

namespace {

struct Table {
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    void (*lerp)(const double*, const double*, double, double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*squared_distance)(const double*, const double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
    Isa isa;
};

constexpr Table scalar_table{scalar::axpy, scalar::scale, scalar::lerp, scalar::dot,
                             scalar::squared_distance, scalar::max_abs, Isa::scalar};
#if defined(SONATA_HAVE_AVX2)
constexpr Table avx2_table{avx2::axpy, avx2::scale, avx2::lerp, avx2::dot,
                           avx2::squared_distance, avx2::max_abs, Isa::avx2};
#endif

const Table* table_for(Isa isa) {
#if defined(SONATA_HAVE_AVX2)
    if (isa == Isa::avx2) return &avx2_table;
#endif
    (void)isa;
    return &scalar_table;
}

const Table* initial_table() {
    if (const char* env = std::getenv("SONATA_SIMD")) {
        if (std::string_view(env) == "scalar") return &scalar_table;
    }
    return isa_supported(Isa::avx2) ? table_for(Isa::avx2) : &scalar_table;
}

std::atomic<const Table*>& current() {
    static std::atomic<const Table*> table{initial_table()};
    return table;
}

const Table& active() { return *current().load(std::memory_order_relaxed); }

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw ArgumentError("kernel operands differ in length");
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(SONATA_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() noexcept { return active().isa; }

void force_isa(Isa isa) {
    if (!isa_supported(isa)) throw ArgumentError(std::string("ISA not supported: ") + isa_name(isa));
    current().store(table_for(isa), std::memory_order_relaxed);
}

const char* isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size());
    active().axpy(a, x.data(), y.data(), x.size());
}

void scale(double a, std::span<double> y) { active().scale(a, y.data(), y.size()); }

void lerp(std::span<const double> x, std::span<const double> target, double t, std::span<double> out) {
    check_sizes(x.size(), target.size());
    check_sizes(x.size(), out.size());
    active().lerp(x.data(), target.data(), t, out.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
    check_sizes(x.size(), y.size());
    return active().dot(x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    check_sizes(x.size(), y.size());
    return active().squared_distance(x.data(), y.data(), x.size());
}

double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

}  // namespace sonata::kernels
