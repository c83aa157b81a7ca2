#include "ldct/gemm.hpp"

#include <Eigen/Dense>

namespace ldct {

namespace {
template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMapRM = Eigen::Map<RowMat<T>>;
}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a,
          const T* b, T beta, T* c) {
  MapRM<T> ma(a, trans_a ? k : m, trans_a ? m : k);
  MapRM<T> mb(b, trans_b ? n : k, trans_b ? k : n);
  MutMapRM<T> mc(c, m, n);
  RowMat<T> prod;
  if (!trans_a && !trans_b) prod = ma * mb;
  else if (trans_a && !trans_b) prod = ma.transpose() * mb;
  else if (!trans_a && trans_b) prod = ma * mb.transpose();
  else prod = ma.transpose() * mb.transpose();
  if (beta == T(0)) mc = alpha * prod;
  else mc = alpha * prod + beta * mc;
}

template void gemm<float>(bool, bool, int, int, int, float, const float*,
                          const float*, float, float*);
template void gemm<double>(bool, bool, int, int, int, double, const double*,
                           const double*, double, double*);

}  // namespace ldct
