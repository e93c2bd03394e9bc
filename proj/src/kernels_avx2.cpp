// Built with -mavx2 and without -mfma; only reached after a cpuid check.
#if defined(__x86_64__)

#include <immintrin.h>

#include "cantor/kernels.hpp"

namespace cantor::kernels {

namespace {

inline double fold(__m256d lo, __m256d hi) {
    const __m256d c = _mm256_add_pd(lo, hi);
    alignas(32) double v[4];
    _mm256_store_pd(v, c);
    return (v[0] + v[1]) + (v[2] + v[3]);
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    const std::size_t bulk = n - n % 8;
    for (std::size_t i = 0; i < bulk; i += 8) {
        lo = _mm256_add_pd(lo, _mm256_loadu_pd(x + i));
        hi = _mm256_add_pd(hi, _mm256_loadu_pd(x + i + 4));
    }
    double total = fold(lo, hi);
    for (std::size_t i = bulk; i < n; ++i) total = total + x[i];
    return total;
}

double sum_squares_avx2(const double* x, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    const std::size_t bulk = n - n % 8;
    for (std::size_t i = 0; i < bulk; i += 8) {
        const __m256d a = _mm256_loadu_pd(x + i);
        const __m256d b = _mm256_loadu_pd(x + i + 4);
        lo = _mm256_add_pd(lo, _mm256_mul_pd(a, a));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(b, b));
    }
    double total = fold(lo, hi);
    for (std::size_t i = bulk; i < n; ++i) total = total + x[i] * x[i];
    return total;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    const std::size_t bulk = n - n % 8;
    for (std::size_t i = 0; i < bulk; i += 8) {
        lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    double total = fold(lo, hi);
    for (std::size_t i = bulk; i < n; ++i) total = total + a[i] * b[i];
    return total;
}

double gather_dot_avx2(const double* a, const std::uint32_t* ia, const double* b, const std::uint32_t* ib,
                       std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    const std::size_t bulk = n - n % 8;
    for (std::size_t i = 0; i < bulk; i += 8) {
        const __m128i ia0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia + i));
        const __m128i ia1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia + i + 4));
        const __m128i ib0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ib + i));
        const __m128i ib1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ib + i + 4));
        lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_i32gather_pd(a, ia0, 8), _mm256_i32gather_pd(b, ib0, 8)));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_i32gather_pd(a, ia1, 8), _mm256_i32gather_pd(b, ib1, 8)));
    }
    double total = fold(lo, hi);
    for (std::size_t i = bulk; i < n; ++i) total = total + a[ia[i]] * b[ib[i]];
    return total;
}

double weighted_sum_squares_avx2(const double* w, const double* x, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    const std::size_t bulk = n - n % 8;
    for (std::size_t i = 0; i < bulk; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(x + i);
        const __m256d x1 = _mm256_loadu_pd(x + i + 4);
        lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(x0, x0)));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_mul_pd(x1, x1)));
    }
    double total = fold(lo, hi);
    for (std::size_t i = bulk; i < n; ++i) total = total + w[i] * (x[i] * x[i]);
    return total;
}

}  // namespace

namespace detail {
const Table kAvx2Table{sum_avx2, sum_squares_avx2, dot_avx2, gather_dot_avx2, weighted_sum_squares_avx2};
}  // namespace detail

}  // namespace cantor::kernels

#endif
