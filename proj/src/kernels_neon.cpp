#if defined(__aarch64__)

#include <arm_neon.h>

#include "cantor/kernels.hpp"

namespace cantor::kernels {

namespace {

// Four float64x2 accumulators hold lanes (0,1) (2,3) (4,5) (6,7).
struct Acc {
    float64x2_t q0 = vdupq_n_f64(0.0);
    float64x2_t q1 = vdupq_n_f64(0.0);
    float64x2_t q2 = vdupq_n_f64(0.0);
    float64x2_t q3 = vdupq_n_f64(0.0);

    double fold() const {
        const float64x2_t c01 = vaddq_f64(q0, q2);  // p0+p4, p1+p5
        const float64x2_t c23 = vaddq_f64(q1, q3);  // p2+p6, p3+p7
        return (vgetq_lane_f64(c01, 0) + vgetq_lane_f64(c01, 1)) +
               (vgetq_lane_f64(c23, 0) + vgetq_lane_f64(c23, 1));
    }
};

double sum_neon(const double* x, std::size_t n) {
    Acc acc;
    const std::size_t bulk = n - n % 8;
    for (std::size_t i = 0; i < bulk; i += 8) {
        acc.q0 = vaddq_f64(acc.q0, vld1q_f64(x + i));
        acc.q1 = vaddq_f64(acc.q1, vld1q_f64(x + i + 2));
        acc.q2 = vaddq_f64(acc.q2, vld1q_f64(x + i + 4));
        acc.q3 = vaddq_f64(acc.q3, vld1q_f64(x + i + 6));
    }
    double total = acc.fold();
    for (std::size_t i = bulk; i < n; ++i) total = total + x[i];
    return total;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    Acc acc;
    const std::size_t bulk = n - n % 8;
    for (std::size_t i = 0; i < bulk; i += 8) {
        acc.q0 = vaddq_f64(acc.q0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc.q1 = vaddq_f64(acc.q1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
        acc.q2 = vaddq_f64(acc.q2, vmulq_f64(vld1q_f64(a + i + 4), vld1q_f64(b + i + 4)));
        acc.q3 = vaddq_f64(acc.q3, vmulq_f64(vld1q_f64(a + i + 6), vld1q_f64(b + i + 6)));
    }
    double total = acc.fold();
    for (std::size_t i = bulk; i < n; ++i) total = total + a[i] * b[i];
    return total;
}

double sum_squares_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

double gather_dot_neon(const double* a, const std::uint32_t* ia, const double* b, const std::uint32_t* ib,
                       std::size_t n) {
    Acc acc;
    const std::size_t bulk = n - n % 8;
    auto pair = [&](std::size_t i) {
        const double av[2] = {a[ia[i]], a[ia[i + 1]]};
        const double bv[2] = {b[ib[i]], b[ib[i + 1]]};
        return vmulq_f64(vld1q_f64(av), vld1q_f64(bv));
    };
    for (std::size_t i = 0; i < bulk; i += 8) {
        acc.q0 = vaddq_f64(acc.q0, pair(i));
        acc.q1 = vaddq_f64(acc.q1, pair(i + 2));
        acc.q2 = vaddq_f64(acc.q2, pair(i + 4));
        acc.q3 = vaddq_f64(acc.q3, pair(i + 6));
    }
    double total = acc.fold();
    for (std::size_t i = bulk; i < n; ++i) total = total + a[ia[i]] * b[ib[i]];
    return total;
}

double weighted_sum_squares_neon(const double* w, const double* x, std::size_t n) {
    Acc acc;
    const std::size_t bulk = n - n % 8;
    auto term = [&](std::size_t i) {
        const float64x2_t xv = vld1q_f64(x + i);
        return vmulq_f64(vld1q_f64(w + i), vmulq_f64(xv, xv));
    };
    for (std::size_t i = 0; i < bulk; i += 8) {
        acc.q0 = vaddq_f64(acc.q0, term(i));
        acc.q1 = vaddq_f64(acc.q1, term(i + 2));
        acc.q2 = vaddq_f64(acc.q2, term(i + 4));
        acc.q3 = vaddq_f64(acc.q3, term(i + 6));
    }
    double total = acc.fold();
    for (std::size_t i = bulk; i < n; ++i) total = total + w[i] * (x[i] * x[i]);
    return total;
}

}  // namespace

namespace detail {
const Table kNeonTable{sum_neon, sum_squares_neon, dot_neon, gather_dot_neon, weighted_sum_squares_neon};
}  // namespace detail

}  // namespace cantor::kernels

#endif
