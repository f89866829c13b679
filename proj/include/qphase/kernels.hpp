#pragma once

#include "qphase/core.hpp"

#include <cstddef>

namespace qphase::kernels {

enum class Isa { scalar, avx2 };

// Inner loops over complex grid arrays. Complex values are interleaved re/im.
struct Table {
    Isa isa;
    // sum conj(a_i) b_i
    cplx (*overlap)(const cplx* a, const cplx* b, std::size_t n);
    // sum conj(a_i) w_i b_i
    cplx (*weighted_overlap)(const cplx* a, const double* w, const cplx* b, std::size_t n);
    // sum |a_i|^2
    double (*norm2)(const cplx* a, std::size_t n);
    // sum w_i |a_i|^2
    double (*weighted_norm2)(const cplx* a, const double* w, std::size_t n);
    // a_i *= m_i, returns sum |a_i|^2 (before) - sum |a_i|^2 (after)
    double (*scale_real)(cplx* a, const double* m, std::size_t n);
    // a_i *= p_i
    void (*cmul)(cplx* a, const cplx* p, std::size_t n);
    // Crank-Nicolson sweep for A psi' = (2I - A) psi, A tridiagonal with diagonal b
    // and constant off-diagonal beta, LU pivots m_i = 1/u_i and c_i = beta m_i.
    void (*cn_forward)(const cplx* psi, const cplx* b, cplx beta, const cplx* m, cplx* y,
                       std::size_t n);
    void (*cn_backward)(cplx* psi, const cplx* y, const cplx* c, std::size_t n);
    // Same sweeps over two independent systems sharing beta.
    void (*cn_forward2)(const cplx* psi1, const cplx* psi2, const cplx* b1, const cplx* b2,
                        cplx beta, const cplx* m1, const cplx* m2, cplx* y1, cplx* y2,
                        std::size_t n);
    void (*cn_backward2)(cplx* psi1, cplx* psi2, const cplx* y1, const cplx* y2,
                         const cplx* c1, const cplx* c2, std::size_t n);
};

const Table& scalar_table();
bool avx2_available();
const Table& avx2_table();

// Resolved once from CPU features; QPHASE_SIMD=scalar|avx2 overrides.
const Table& active();
void select(Isa isa);
const char* name(Isa isa);

// Flush-to-zero and denormals-are-zero for the calling thread while alive.
// Wavefunction tails inside high walls otherwise decay into subnormals.
class FlushDenormals {
public:
    FlushDenormals();
    ~FlushDenormals();
    FlushDenormals(const FlushDenormals&) = delete;
    FlushDenormals& operator=(const FlushDenormals&) = delete;

private:
    unsigned saved_ = 0;
};

} // namespace qphase::kernels
