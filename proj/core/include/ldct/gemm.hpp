#pragma once

namespace ldct {

// Row-major C(m x n) = alpha * op(A) * op(B) + beta * C, with op = transpose
// when the corresponding flag is set. A is (m x k) before transposition,
// B is (k x n). Backed by Eigen; single-threaded and deterministic.
template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a,
          const T* b, T beta, T* c);

}  // namespace ldct
