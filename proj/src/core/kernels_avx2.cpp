#include "qphase/kernels.hpp"

#include <immintrin.h>

namespace qphase::kernels {
namespace {

inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

// [x0, x1] * [y0, y1] lane-pairwise complex product
inline __m256d cmul4(__m256d x, __m256d y) {
    const __m256d xr = _mm256_movedup_pd(x);
    const __m256d xi = _mm256_permute_pd(x, 0xF);
    const __m256d ys = _mm256_permute_pd(y, 0x5);
    return _mm256_fmaddsub_pd(xr, y, _mm256_mul_pd(xi, ys));
}

inline __m128d cmul2(__m128d x, __m128d y) {
    const __m128d xr = _mm_movedup_pd(x);
    const __m128d xi = _mm_permute_pd(x, 0x3);
    const __m128d ys = _mm_permute_pd(y, 0x1);
    return _mm_fmaddsub_pd(xr, y, _mm_mul_pd(xi, ys));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Sums of even and odd lanes of v.
inline void hsum_pairs(__m256d v, double& even, double& odd) {
    const __m128d s = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
    even = _mm_cvtsd_f64(s);
    odd = _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

inline __m256d pair(const cplx* lo, const cplx* hi) {
    return _mm256_insertf128_pd(_mm256_castpd128_pd256(_mm_loadu_pd(dp(lo))), _mm_loadu_pd(dp(hi)),
                                1);
}

inline void store_pair(cplx* lo, cplx* hi, __m256d v) {
    _mm_storeu_pd(dp(lo), _mm256_castpd256_pd128(v));
    _mm_storeu_pd(dp(hi), _mm256_extractf128_pd(v, 1));
}

cplx overlap(const cplx* a, const cplx* b, std::size_t n) {
    __m256d sr = _mm256_setzero_pd();
    __m256d si = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d x = _mm256_loadu_pd(dp(a + i));
        const __m256d y = _mm256_loadu_pd(dp(b + i));
        sr = _mm256_fmadd_pd(_mm256_movedup_pd(x), y, sr);
        si = _mm256_fmadd_pd(_mm256_permute_pd(x, 0xF), _mm256_permute_pd(y, 0x5), si);
    }
    double re_r, im_r, re_i, im_i;
    hsum_pairs(sr, re_r, im_r);
    hsum_pairs(si, re_i, im_i);
    double re = re_r + re_i;
    double im = im_r - im_i;
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

cplx weighted_overlap(const cplx* a, const double* w, const cplx* b, std::size_t n) {
    __m256d sr = _mm256_setzero_pd();
    __m256d si = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d ww = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
        const __m256d x = _mm256_mul_pd(ww, _mm256_loadu_pd(dp(a + i)));
        const __m256d y = _mm256_loadu_pd(dp(b + i));
        sr = _mm256_fmadd_pd(_mm256_movedup_pd(x), y, sr);
        si = _mm256_fmadd_pd(_mm256_permute_pd(x, 0xF), _mm256_permute_pd(y, 0x5), si);
    }
    double re_r, im_r, re_i, im_i;
    hsum_pairs(sr, re_r, im_r);
    hsum_pairs(si, re_i, im_i);
    double re = re_r + re_i;
    double im = im_r - im_i;
    for (; i < n; ++i) {
        re += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
        im += w[i] * (a[i].real() * b[i].imag() - a[i].imag() * b[i].real());
    }
    return {re, im};
}

double norm2(const cplx* a, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x0 = _mm256_loadu_pd(dp(a + i));
        const __m256d x1 = _mm256_loadu_pd(dp(a + i + 2));
        s0 = _mm256_fmadd_pd(x0, x0, s0);
        s1 = _mm256_fmadd_pd(x1, x1, s1);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

double weighted_norm2(const cplx* a, const double* w, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d ww = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
        const __m256d x = _mm256_loadu_pd(dp(a + i));
        s0 = _mm256_fmadd_pd(_mm256_mul_pd(ww, x), x, s0);
    }
    double s = hsum(s0);
    for (; i < n; ++i) s += w[i] * (a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
    return s;
}

double scale_real(cplx* a, const double* m, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d lost = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d mm = _mm256_set_pd(m[i + 1], m[i + 1], m[i], m[i]);
        const __m256d x = _mm256_loadu_pd(dp(a + i));
        const __m256d keep = _mm256_fnmadd_pd(mm, mm, one);
        lost = _mm256_fmadd_pd(_mm256_mul_pd(x, x), keep, lost);
        _mm256_storeu_pd(dp(a + i), _mm256_mul_pd(mm, x));
    }
    double s = hsum(lost);
    for (; i < n; ++i) {
        const double p = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
        s += p * (1.0 - m[i] * m[i]);
        a[i] *= m[i];
    }
    return s;
}

void cmul(cplx* a, const cplx* p, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d x = _mm256_loadu_pd(dp(a + i));
        const __m256d y = _mm256_loadu_pd(dp(p + i));
        _mm256_storeu_pd(dp(a + i), cmul4(x, y));
    }
    for (; i < n; ++i) {
        const __m128d x = _mm_loadu_pd(dp(a + i));
        const __m128d y = _mm_loadu_pd(dp(p + i));
        _mm_storeu_pd(dp(a + i), cmul2(x, y));
    }
}

void cn_forward(const cplx* psi, const cplx* b, cplx beta, const cplx* m, cplx* y, std::size_t n) {
    const __m128d two = _mm_set_pd(0.0, 2.0);
    const __m128d bt = _mm_set_pd(beta.imag(), beta.real());
    const __m128d zero = _mm_setzero_pd();
    __m128d prev = zero;
    __m128d left = zero;
    __m128d mid = n > 0 ? _mm_loadu_pd(dp(psi)) : zero;
    for (std::size_t i = 0; i < n; ++i) {
        const __m128d right = i + 1 < n ? _mm_loadu_pd(dp(psi + i + 1)) : zero;
        const __m128d diag = _mm_sub_pd(two, _mm_loadu_pd(dp(b + i)));
        const __m128d r = _mm_sub_pd(cmul2(diag, mid), cmul2(bt, _mm_add_pd(left, right)));
        prev = cmul2(_mm_sub_pd(r, cmul2(bt, prev)), _mm_loadu_pd(dp(m + i)));
        _mm_storeu_pd(dp(y + i), prev);
        left = mid;
        mid = right;
    }
}

void cn_backward(cplx* psi, const cplx* y, const cplx* c, std::size_t n) {
    __m128d next = _mm_setzero_pd();
    for (std::size_t i = n; i-- > 0;) {
        next = _mm_sub_pd(_mm_loadu_pd(dp(y + i)), cmul2(_mm_loadu_pd(dp(c + i)), next));
        _mm_storeu_pd(dp(psi + i), next);
    }
}

void cn_forward2(const cplx* psi1, const cplx* psi2, const cplx* b1, const cplx* b2, cplx beta,
                 const cplx* m1, const cplx* m2, cplx* y1, cplx* y2, std::size_t n) {
    const __m256d two = _mm256_set_pd(0.0, 2.0, 0.0, 2.0);
    const __m256d bt = _mm256_set_pd(beta.imag(), beta.real(), beta.imag(), beta.real());
    const __m256d zero = _mm256_setzero_pd();
    __m256d prev = zero;
    __m256d left = zero;
    __m256d mid = n > 0 ? pair(psi1, psi2) : zero;
    for (std::size_t i = 0; i < n; ++i) {
        const __m256d right = i + 1 < n ? pair(psi1 + i + 1, psi2 + i + 1) : zero;
        const __m256d diag = _mm256_sub_pd(two, pair(b1 + i, b2 + i));
        const __m256d r = _mm256_sub_pd(cmul4(diag, mid), cmul4(bt, _mm256_add_pd(left, right)));
        prev = cmul4(_mm256_sub_pd(r, cmul4(bt, prev)), pair(m1 + i, m2 + i));
        store_pair(y1 + i, y2 + i, prev);
        left = mid;
        mid = right;
    }
}

void cn_backward2(cplx* psi1, cplx* psi2, const cplx* y1, const cplx* y2, const cplx* c1,
                  const cplx* c2, std::size_t n) {
    __m256d next = _mm256_setzero_pd();
    for (std::size_t i = n; i-- > 0;) {
        next = _mm256_sub_pd(pair(y1 + i, y2 + i), cmul4(pair(c1 + i, c2 + i), next));
        store_pair(psi1 + i, psi2 + i, next);
    }
}

} // namespace

const Table& avx2_table() {
    static const Table t{Isa::avx2, overlap,    weighted_overlap, norm2,       weighted_norm2,
                         scale_real, cmul,      cn_forward,       cn_backward, cn_forward2,
                         cn_backward2};
    return t;
}

} // namespace qphase::kernels
