#include "gblend/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define GBLEND_X86 1
#include <immintrin.h>
#else
#define GBLEND_X86 0
#endif

#include <algorithm>
#include <stdexcept>

namespace gblend::kernels {

#if GBLEND_X86

namespace {

#define GBLEND_AVX2 __attribute__((target("avx2,fma")))

// exp(x) for x <= 0, four lanes. Cody-Waite reduction by ln 2 and a
// degree-13 Taylor polynomial on |r| <= ln2/2 (truncation < 5e-18).
// Arguments below -700 flush to zero.
GBLEND_AVX2 inline __m256d exp_nonpositive(__m256d x) {
  const __m256d kLog2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d kLn2Hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d kLn2Lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d kFloor = _mm256_set1_pd(-700.0);

  const __m256d underflow = _mm256_cmp_pd(x, kFloor, _CMP_LT_OQ);
  x = _mm256_max_pd(x, kFloor);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kLog2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kLn2Hi, x);
  r = _mm256_fnmadd_pd(n, kLn2Lo, r);

  // 1/k! for k = 13 .. 0
  static constexpr double kInvFact[14] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(ni);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

GBLEND_AVX2 void composite_block(std::span<const SampleSplat> splats, const double* xs,
                                 const double* ys, const CompositeParams& params, double* out_r,
                                 double* out_g, double* out_b, double* out_t) {
  const __m256d px = _mm256_loadu_pd(xs);
  const __m256d py = _mm256_loadu_pd(ys);
  const __m256d eps = _mm256_set1_pd(params.epsilon);
  const __m256d neg_half = _mm256_set1_pd(-0.5);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d skip_below = _mm256_set1_pd(1.0 / 255.0);
  const __m256d alpha_max = _mm256_set1_pd(0.99);

  __m256d r = _mm256_setzero_pd();
  __m256d g = _mm256_setzero_pd();
  __m256d b = _mm256_setzero_pd();
  __m256d t = _mm256_set1_pd(1.0);
  __m256d active = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));

  for (const SampleSplat& s : splats) {
    const __m256d dx = _mm256_sub_pd(px, _mm256_set1_pd(s.mx));
    const __m256d dy = _mm256_sub_pd(py, _mm256_set1_pd(s.my));
    // qa dx^2 + 2 qb dx dy + qc dy^2
    __m256d q = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(s.qc), dy), dy);
    q = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_mul_pd(two, _mm256_set1_pd(s.qb)), dx), dy, q);
    q = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_set1_pd(s.qa), dx), dx, q);
    __m256d alpha = _mm256_mul_pd(_mm256_set1_pd(s.opacity), exp_nonpositive(_mm256_mul_pd(neg_half, q)));
    if (params.legacy_clamp) {
      const __m256d keep = _mm256_cmp_pd(alpha, skip_below, _CMP_GE_OQ);
      alpha = _mm256_and_pd(keep, _mm256_min_pd(alpha, alpha_max));
    }
    const __m256d w = _mm256_and_pd(active, _mm256_mul_pd(alpha, t));
    r = _mm256_fmadd_pd(_mm256_set1_pd(s.r), w, r);
    g = _mm256_fmadd_pd(_mm256_set1_pd(s.g), w, g);
    b = _mm256_fmadd_pd(_mm256_set1_pd(s.b), w, b);
    t = _mm256_sub_pd(t, w);
    active = _mm256_and_pd(active, _mm256_cmp_pd(t, eps, _CMP_GE_OQ));
    if (_mm256_movemask_pd(active) == 0) break;
  }
  _mm256_storeu_pd(out_r, r);
  _mm256_storeu_pd(out_g, g);
  _mm256_storeu_pd(out_b, b);
  _mm256_storeu_pd(out_t, t);
}

}  // namespace

void composite_samples_avx2(std::span<const SampleSplat> splats, std::span<const double> xs,
                            std::span<const double> ys, const CompositeParams& params,
                            SampleOutputs out) {
  const std::size_t n = xs.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    composite_block(splats, xs.data() + i, ys.data() + i, params, out.r.data() + i,
                    out.g.data() + i, out.b.data() + i, out.t.data() + i);
  if (i < n) {
    // Pad the ragged tail to a full block so every sample takes the same path.
    double tx[4], ty[4], tr[4], tg[4], tb[4], tt[4];
    for (std::size_t k = 0; k < 4; ++k) {
      tx[k] = xs[i + std::min(k, n - i - 1)];
      ty[k] = ys[i + std::min(k, n - i - 1)];
    }
    composite_block(splats, tx, ty, params, tr, tg, tb, tt);
    for (std::size_t k = 0; i + k < n; ++k) {
      out.r[i + k] = tr[k];
      out.g[i + k] = tg[k];
      out.b[i + k] = tb[k];
      out.t[i + k] = tt[k];
    }
  }
}

#else

void composite_samples_avx2(std::span<const SampleSplat>, std::span<const double>,
                            std::span<const double>, const CompositeParams&, SampleOutputs) {
  throw std::logic_error("AVX2 kernel not built for this architecture");
}

#endif

}  // namespace gblend::kernels
