#include "qphase/kernels.hpp"

namespace qphase::kernels {
namespace {

cplx overlap(const cplx* a, const cplx* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

cplx weighted_overlap(const cplx* a, const double* w, const cplx* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
        im += w[i] * (a[i].real() * b[i].imag() - a[i].imag() * b[i].real());
    }
    return {re, im};
}

double norm2(const cplx* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

double weighted_norm2(const cplx* a, const double* w, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += w[i] * (a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
    return s;
}

double scale_real(cplx* a, const double* m, std::size_t n) {
    double lost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
        lost += p * (1.0 - m[i] * m[i]);
        a[i] *= m[i];
    }
    return lost;
}

inline cplx mul(cplx x, cplx y) {
    return {x.real() * y.real() - x.imag() * y.imag(), x.real() * y.imag() + x.imag() * y.real()};
}

void cmul(cplx* a, const cplx* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] = mul(a[i], p[i]);
}

void cn_forward(const cplx* psi, const cplx* b, cplx beta, const cplx* m, cplx* y, std::size_t n) {
    const cplx two(2.0, 0.0);
    cplx prev(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx left = i > 0 ? psi[i - 1] : cplx{};
        const cplx right = i + 1 < n ? psi[i + 1] : cplx{};
        const cplx r = mul(two - b[i], psi[i]) - mul(beta, left + right);
        prev = mul(r - mul(beta, prev), m[i]);
        y[i] = prev;
    }
}

void cn_backward(cplx* psi, const cplx* y, const cplx* c, std::size_t n) {
    cplx next(0.0, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        next = y[i] - mul(c[i], next);
        psi[i] = next;
    }
}

void cn_forward2(const cplx* psi1, const cplx* psi2, const cplx* b1, const cplx* b2, cplx beta,
                 const cplx* m1, const cplx* m2, cplx* y1, cplx* y2, std::size_t n) {
    cn_forward(psi1, b1, beta, m1, y1, n);
    cn_forward(psi2, b2, beta, m2, y2, n);
}

void cn_backward2(cplx* psi1, cplx* psi2, const cplx* y1, const cplx* y2, const cplx* c1,
                  const cplx* c2, std::size_t n) {
    cn_backward(psi1, y1, c1, n);
    cn_backward(psi2, y2, c2, n);
}

} // namespace

const Table& scalar_table() {
    static const Table t{Isa::scalar, overlap,    weighted_overlap, norm2,       weighted_norm2,
                         scale_real,  cmul,       cn_forward,       cn_backward, cn_forward2,
                         cn_backward2};
    return t;
}

} // namespace qphase::kernels
