// AVX2 + FMA variants of the batch kernels. Compiled with -mavx2 -mfma; only
// reached after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "kernels_internal.hpp"
#include "rician/special.hpp"
#include "rician/simd/kernels.hpp"

namespace rician::simd {

namespace {

constexpr std::size_t kLanes = 4;

// fdlibm split of ln 2: the high part has trailing zero bits so n * kLn2Hi is
// exact for |n| < 2^11.
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;

inline __m256d pow2_split(__m256d n) {
    // 2^n as 2^(n/2) * 2^(n - n/2) so that subnormal results round once.
    const __m256d half = _mm256_round_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)),
                                         _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
    const __m256d rest = _mm256_sub_pd(n, half);
    const auto to_pow2 = [](__m256d k) {
        const __m128i k32 = _mm256_cvtpd_epi32(k);
        __m256i k64 = _mm256_cvtepi32_epi64(k32);
        k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
        return _mm256_castsi256_pd(_mm256_slli_epi64(k64, 52));
    };
    return _mm256_mul_pd(to_pow2(half), to_pow2(rest));
}

inline __m256d exp_pd(__m256d x) {
    x = _mm256_max_pd(x, _mm256_set1_pd(-1400.0));
    x = _mm256_min_pd(x, _mm256_set1_pd(710.0));
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(std::numbers::log2e)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);
    // |r| <= ln2/2: Taylor polynomial of degree 13 is below 1e-17 relative.
    static constexpr std::array<double, 14> inv_fact = [] {
        std::array<double, 14> c{};
        double f = 1.0;
        for (int k = 0; k < 14; ++k) {
            if (k > 0)
                f *= k;
            c[k] = 1.0 / f;
        }
        return c;
    }();
    __m256d p = _mm256_set1_pd(inv_fact[13]);
    for (int k = 12; k >= 0; --k)
        p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[k]));
    return _mm256_mul_pd(p, pow2_split(n));
}

// Natural log for positive normal inputs.
inline __m256d log_pd(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
    // exact integer -> double through the 2^52 magic constant
    const __m256d magic = _mm256_set1_pd(4503599627370496.0);
    __m256d e = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(magic))), magic);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
    const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(std::numbers::sqrt2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

    // ln m = 2 atanh(f / (2 + f)), |s| <= 0.1716
    const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
    const __m256d s = _mm256_div_pd(f, _mm256_add_pd(f, _mm256_set1_pd(2.0)));
    const __m256d s2 = _mm256_mul_pd(s, s);
    constexpr int kTerms = 12;
    __m256d p = _mm256_set1_pd(1.0 / (2 * kTerms + 1));
    for (int k = kTerms - 1; k >= 0; --k)
        p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / (2 * k + 1)));
    const __m256d lnm = _mm256_mul_pd(_mm256_add_pd(s, s), p);
    return _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi),
                           _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), lnm));
}

// log1p for x >= 0
inline __m256d log1p_pd(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d u = _mm256_add_pd(one, x);
    const __m256d d = _mm256_sub_pd(u, one);
    const __m256d tiny = _mm256_cmp_pd(d, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d safe_d = _mm256_blendv_pd(d, one, tiny);
    const __m256d v = _mm256_div_pd(_mm256_mul_pd(log_pd(u), x), safe_d);
    return _mm256_blendv_pd(v, x, tiny);
}

inline bool all_zero(__m256d mask) { return _mm256_movemask_pd(mask) == 0; }

inline __m256d log_i0_series(__m256d z) {
    const __m256d q = _mm256_mul_pd(_mm256_set1_pd(0.25), _mm256_mul_pd(z, z));
    const __m256d tol = _mm256_set1_pd(detail::kBesselTermTol);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d term = one;
    __m256d tail = _mm256_setzero_pd();
    for (int k = 1; k <= detail::kBesselMaxSeriesTerms; ++k) {
        term = _mm256_mul_pd(term, _mm256_div_pd(q, _mm256_set1_pd(double(k) * k)));
        tail = _mm256_add_pd(tail, term);
        const __m256d open =
            _mm256_cmp_pd(term, _mm256_mul_pd(tol, _mm256_add_pd(one, tail)), _CMP_GT_OQ);
        if (all_zero(open))
            break;
    }
    return log1p_pd(tail);
}

inline __m256d log_i0_asymptotic(__m256d z) {
    const __m256d t = _mm256_div_pd(_mm256_set1_pd(0.125), z);
    const __m256d tol = _mm256_set1_pd(detail::kBesselTermTol);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d term = one;
    __m256d tail = _mm256_setzero_pd();
    for (int k = 1; k <= detail::kBesselMaxAsymptoticTerms; ++k) {
        const double odd = 2.0 * k - 1.0;
        term = _mm256_mul_pd(term, _mm256_mul_pd(t, _mm256_set1_pd(odd * odd / k)));
        tail = _mm256_add_pd(tail, term);
        const __m256d open =
            _mm256_cmp_pd(term, _mm256_mul_pd(tol, _mm256_add_pd(one, tail)), _CMP_GT_OQ);
        if (all_zero(open))
            break;
    }
    const __m256d half_log =
        _mm256_mul_pd(_mm256_set1_pd(0.5),
                      _mm256_add_pd(_mm256_set1_pd(std::log(2.0 * std::numbers::pi)), log_pd(z)));
    return _mm256_add_pd(_mm256_sub_pd(z, half_log), log1p_pd(tail));
}

inline __m256d log_i0_pd(__m256d z) {
    const __m256d limit = _mm256_set1_pd(detail::kBesselSeriesLimit);
    const __m256d asym = _mm256_cmp_pd(z, limit, _CMP_GE_OQ);
    const int mask = _mm256_movemask_pd(asym);
    if (mask == 0)
        return log_i0_series(z);
    if (mask == 0xF)
        return log_i0_asymptotic(z);
    const __m256d a = log_i0_asymptotic(_mm256_max_pd(z, limit));
    const __m256d s = log_i0_series(_mm256_min_pd(z, limit));
    return _mm256_blendv_pd(s, a, asym);
}

inline __m256d bessel_ratio_series(__m256d z) {
    const __m256d q = _mm256_mul_pd(_mm256_set1_pd(0.25), _mm256_mul_pd(z, z));
    const __m256d tol = _mm256_set1_pd(detail::kBesselTermTol);
    __m256d a = _mm256_set1_pd(1.0), b = a, sa = a, sb = a;
    for (int k = 1; k <= detail::kBesselMaxSeriesTerms; ++k) {
        a = _mm256_mul_pd(a, _mm256_div_pd(q, _mm256_set1_pd(double(k) * k)));
        b = _mm256_mul_pd(b, _mm256_div_pd(q, _mm256_set1_pd(double(k) * (k + 1))));
        sa = _mm256_add_pd(sa, a);
        sb = _mm256_add_pd(sb, b);
        const __m256d open = _mm256_or_pd(_mm256_cmp_pd(a, _mm256_mul_pd(tol, sa), _CMP_GT_OQ),
                                          _mm256_cmp_pd(b, _mm256_mul_pd(tol, sb), _CMP_GT_OQ));
        if (all_zero(open))
            break;
    }
    return _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_div_pd(sb, sa));
}

inline __m256d bessel_ratio_asymptotic(__m256d z) {
    const __m256d t = _mm256_div_pd(_mm256_set1_pd(0.125), z);
    const __m256d tol = _mm256_set1_pd(detail::kBesselTermTol);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
    __m256d t0 = _mm256_set1_pd(1.0), t1 = t0, s0 = t0, s1 = t0;
    for (int k = 1; k <= detail::kBesselMaxAsymptoticTerms; ++k) {
        const double odd = 2.0 * k - 1.0;
        t0 = _mm256_mul_pd(t0, _mm256_mul_pd(t, _mm256_set1_pd(odd * odd / k)));
        t1 = _mm256_mul_pd(t1, _mm256_mul_pd(t, _mm256_set1_pd((odd * odd - 4.0) / k)));
        s0 = _mm256_add_pd(s0, t0);
        s1 = _mm256_add_pd(s1, t1);
        const __m256d open = _mm256_or_pd(
            _mm256_cmp_pd(t0, _mm256_mul_pd(tol, s0), _CMP_GT_OQ),
            _mm256_cmp_pd(_mm256_and_pd(t1, abs_mask),
                          _mm256_mul_pd(tol, _mm256_and_pd(s1, abs_mask)), _CMP_GT_OQ));
        if (all_zero(open))
            break;
    }
    return _mm256_div_pd(s1, _mm256_mul_pd(s0, z));
}

inline __m256d bessel_ratio_pd(__m256d z) {
    const __m256d limit = _mm256_set1_pd(detail::kBesselSeriesLimit);
    const __m256d asym = _mm256_cmp_pd(z, limit, _CMP_GE_OQ);
    const int mask = _mm256_movemask_pd(asym);
    if (mask == 0)
        return bessel_ratio_series(z);
    if (mask == 0xF)
        return bessel_ratio_asymptotic(z);
    const __m256d a = bessel_ratio_asymptotic(_mm256_max_pd(z, limit));
    const __m256d s = bessel_ratio_series(_mm256_min_pd(z, limit));
    return _mm256_blendv_pd(s, a, asym);
}

// Applies op to full blocks and to a zero-padded remainder.
template <class Op>
inline void for_blocks(std::span<const double> in, std::span<double> out, double pad, Op op) {
    const std::size_t n = in.size();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(out.data() + i, op(_mm256_loadu_pd(in.data() + i)));
    if (i < n) {
        alignas(32) std::array<double, kLanes> buf;
        buf.fill(pad);
        std::copy(in.begin() + i, in.end(), buf.begin());
        _mm256_store_pd(buf.data(), op(_mm256_load_pd(buf.data())));
        std::copy(buf.begin(), buf.begin() + (n - i), out.begin() + i);
    }
}

void log_i0_avx2(std::span<const double> z, std::span<double> out) {
    for_blocks(z, out, 0.0, log_i0_pd);
}

void bessel_ratio_avx2(std::span<const double> z, std::span<double> out) {
    for_blocks(z, out, 0.0, bessel_ratio_pd);
}

void exp_avx2(std::span<const double> x, std::span<double> out) {
    for_blocks(x, out, 0.0, exp_pd);
}

void log_kernel_avx2(std::span<const double> R, double s, double K, std::span<double> out) {
    const double a = 1.0 + s;
    const __m256d neg_log_a = _mm256_set1_pd(-std::log1p(s));
    const __m256d inv_a = _mm256_set1_pd(1.0 / a);
    const __m256d ks = _mm256_set1_pd(K * s);
    const bool bessel = K != 0.0 && s != 0.0;
    const __m256d c = _mm256_set1_pd(2.0 * std::sqrt(K * s) / a);
    for_blocks(R, out, 0.0, [&](__m256d r) {
        // -(R + K s)/a matches the scalar operation order
        const __m256d base =
            _mm256_sub_pd(neg_log_a, _mm256_mul_pd(_mm256_add_pd(r, ks), inv_a));
        if (!bessel)
            return base;
        const __m256d z = _mm256_mul_pd(c, _mm256_sqrt_pd(r));
        return _mm256_add_pd(base, log_i0_pd(z));
    });
}

void dlog_kernel_avx2(std::span<const double> R, double s, double K, std::span<double> out) {
    const double a = 1.0 + s;
    const double inv = 1.0 / a;
    const __m256d vinv = _mm256_set1_pd(inv);
    const __m256d vinv2 = _mm256_set1_pd(inv * inv);
    const __m256d vk = _mm256_set1_pd(K);
    const bool bessel = K != 0.0;
    const __m256d c = _mm256_set1_pd(2.0 * std::sqrt(K * s) * inv);
    const __m256d coef = _mm256_set1_pd(2.0 * K * (1.0 - s) * inv * inv * inv);
    for_blocks(R, out, 0.0, [&](__m256d r) {
        const __m256d d = _mm256_fmadd_pd(_mm256_sub_pd(r, vk), vinv2, _mm256_sub_pd(_mm256_setzero_pd(), vinv));
        if (!bessel)
            return d;
        const __m256d z = _mm256_mul_pd(c, _mm256_sqrt_pd(r));
        return _mm256_fmadd_pd(_mm256_mul_pd(coef, r), bessel_ratio_pd(z), d);
    });
}

void log_mixture_avx2(std::span<const double> R, std::span<const double> s,
                      std::span<const double> log_p, double K, std::span<double> out,
                      std::span<double> scratch) {
    const std::size_t n = R.size();
    const std::size_t m = s.size();
    for (std::size_t j = 0; j < m; ++j)
        log_kernel_avx2(R, s[j], K, scratch.subspan(j * n, n));

    const auto reduce = [&](std::size_t i, std::size_t count) {
        alignas(32) std::array<double, kLanes> row{};
        __m256d hi = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
        __m256d cached[64];
        const bool cache = m <= 64;
        for (std::size_t j = 0; j < m; ++j) {
            std::copy_n(scratch.data() + j * n + i, count, row.begin());
            const __m256d v = _mm256_add_pd(_mm256_load_pd(row.data()), _mm256_set1_pd(log_p[j]));
            if (cache)
                cached[j] = v;
            hi = _mm256_max_pd(hi, v);
        }
        __m256d sum = _mm256_setzero_pd();
        for (std::size_t j = 0; j < m; ++j) {
            __m256d v;
            if (cache) {
                v = cached[j];
            } else {
                std::copy_n(scratch.data() + j * n + i, count, row.begin());
                v = _mm256_add_pd(_mm256_load_pd(row.data()), _mm256_set1_pd(log_p[j]));
            }
            sum = _mm256_add_pd(sum, exp_pd(_mm256_sub_pd(v, hi)));
        }
        _mm256_store_pd(row.data(), _mm256_add_pd(hi, log_pd(sum)));
        std::copy_n(row.begin(), count, out.begin() + i);
    };
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        reduce(i, kLanes);
    if (i < n)
        reduce(i, n - i);
}

}  // namespace

const KernelTable* avx2_kernels_unchecked() {
    static const KernelTable table{
        Isa::Avx2,        "avx2",           &log_i0_avx2,     &bessel_ratio_avx2,
        &exp_avx2,        &log_kernel_avx2, &dlog_kernel_avx2, &log_mixture_avx2,
    };
    return &table;
}

}  // namespace rician::simd
