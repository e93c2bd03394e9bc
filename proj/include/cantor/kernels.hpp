#pragma once

// Reduction kernels used by the martingale, energy and Monte Carlo
// aggregation code, in a scalar reference version and vector versions
// chosen at runtime.
//
// All variants accumulate in the same order: eight interleaved partial sums
// (lane j takes elements i = j mod 8 of the bulk), folded as
// ((p0+p4)+(p1+p5)) + ((p2+p6)+(p3+p7)), then the tail added in sequence.
// With fused multiply-add disabled this makes every variant bit-identical to
// the scalar one.

#include <cstdint>
#include <span>

namespace cantor::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);

// Best available ISA, unless CANTOR_ISA=scalar|avx2|neon overrides it.
Isa active_isa();

struct Table {
    double (*sum)(const double* x, std::size_t n);
    double (*sum_squares)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[ia[i]] * b[ib[i]]
    double (*gather_dot)(const double* a, const std::uint32_t* ia, const double* b, const std::uint32_t* ib,
                         std::size_t n);
    // sum_i w[i] * x[i]^2
    double (*weighted_sum_squares)(const double* w, const double* x, std::size_t n);
};

const Table& table(Isa isa);

inline const Table& active() {
    static const Table& t = table(active_isa());
    return t;
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double gather_dot(std::span<const double> a, std::span<const std::uint32_t> ia, std::span<const double> b,
                         std::span<const std::uint32_t> ib) {
    return active().gather_dot(a.data(), ia.data(), b.data(), ib.data(), ia.size());
}
inline double weighted_sum_squares(std::span<const double> w, std::span<const double> x) {
    return active().weighted_sum_squares(w.data(), x.data(), w.size());
}

namespace detail {
extern const Table kScalarTable;
#if defined(__x86_64__)
extern const Table kAvx2Table;
#endif
#if defined(__aarch64__)
extern const Table kNeonTable;
#endif
}  // namespace detail

}  // namespace cantor::kernels
