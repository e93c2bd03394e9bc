#include <cstdlib>
#include <string_view>

#include "cantor/kernels.hpp"

namespace cantor::kernels {

namespace {

constexpr std::size_t kLanes = 8;

double fold(const double (&p)[kLanes]) {
    return ((p[0] + p[4]) + (p[1] + p[5])) + ((p[2] + p[6]) + (p[3] + p[7]));
}

double sum_scalar(const double* x, std::size_t n) {
    double p[kLanes] = {};
    const std::size_t bulk = n - n % kLanes;
    for (std::size_t i = 0; i < bulk; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) p[j] = p[j] + x[i + j];
    }
    double total = fold(p);
    for (std::size_t i = bulk; i < n; ++i) total = total + x[i];
    return total;
}

double sum_squares_scalar(const double* x, std::size_t n) {
    double p[kLanes] = {};
    const std::size_t bulk = n - n % kLanes;
    for (std::size_t i = 0; i < bulk; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) p[j] = p[j] + x[i + j] * x[i + j];
    }
    double total = fold(p);
    for (std::size_t i = bulk; i < n; ++i) total = total + x[i] * x[i];
    return total;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double p[kLanes] = {};
    const std::size_t bulk = n - n % kLanes;
    for (std::size_t i = 0; i < bulk; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) p[j] = p[j] + a[i + j] * b[i + j];
    }
    double total = fold(p);
    for (std::size_t i = bulk; i < n; ++i) total = total + a[i] * b[i];
    return total;
}

double gather_dot_scalar(const double* a, const std::uint32_t* ia, const double* b, const std::uint32_t* ib,
                         std::size_t n) {
    double p[kLanes] = {};
    const std::size_t bulk = n - n % kLanes;
    for (std::size_t i = 0; i < bulk; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) p[j] = p[j] + a[ia[i + j]] * b[ib[i + j]];
    }
    double total = fold(p);
    for (std::size_t i = bulk; i < n; ++i) total = total + a[ia[i]] * b[ib[i]];
    return total;
}

double weighted_sum_squares_scalar(const double* w, const double* x, std::size_t n) {
    double p[kLanes] = {};
    const std::size_t bulk = n - n % kLanes;
    for (std::size_t i = 0; i < bulk; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) p[j] = p[j] + w[i + j] * (x[i + j] * x[i + j]);
    }
    double total = fold(p);
    for (std::size_t i = bulk; i < n; ++i) total = total + w[i] * (x[i] * x[i]);
    return total;
}

}  // namespace

namespace detail {
const Table kScalarTable{sum_scalar, sum_squares_scalar, dot_scalar, gather_dot_scalar, weighted_sum_squares_scalar};
}  // namespace detail

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::kScalar: return "scalar";
        case Isa::kAvx2: return "avx2";
        case Isa::kNeon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::kScalar: return true;
        case Isa::kAvx2:
#if defined(__x86_64__)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::kNeon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() {
    if (const char* env = std::getenv("CANTOR_ISA")) {
        const std::string_view want(env);
        for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
            if (want == isa_name(isa) && isa_available(isa)) return isa;
        }
    }
    if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
    if (isa_available(Isa::kNeon)) return Isa::kNeon;
    return Isa::kScalar;
}

const Table& table(Isa isa) {
#if defined(__x86_64__)
    if (isa == Isa::kAvx2 && isa_available(isa)) return detail::kAvx2Table;
#endif
#if defined(__aarch64__)
    if (isa == Isa::kNeon) return detail::kNeonTable;
#endif
    return detail::kScalarTable;
}

}  // namespace cantor::kernels
