#pragma once

#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ldct {

// Dense tensor node: (channels, height, width) for activations,
// (out_ch, in_ch, kh, kw) for kernels, {1} for scalars. Gradient buffer is
// allocated with the value buffer and zero-initialized.
template <typename T>
struct TensorBuf {
  std::vector<int> shape;
  std::vector<T> val;
  std::vector<T> grad;

  explicit TensorBuf(std::vector<int> s) : shape(std::move(s)) {
    const size_t n = numel();
    val.assign(n, T(0));
    grad.assign(n, T(0));
  }
  size_t numel() const {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <typename T>
using TensorPtr = std::shared_ptr<TensorBuf<T>>;

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape) {
  return std::make_shared<TensorBuf<T>>(std::move(shape));
}

// Reverse-mode tape. Ops append their backward closure as they execute, so
// creation order is a topological order and one reverse sweep visits every
// node exactly once.
template <typename T>
class Tape {
 public:
  void push(std::function<void()> backward_fn) {
    nodes_.push_back(std::move(backward_fn));
  }

  // Seeds d(loss)/d(loss) = 1 and runs the reverse sweep. The loss must be a
  // scalar node of this tape.
  void backward(const TensorPtr<T>& loss) {
    if (loss->numel() != 1)
      throw std::invalid_argument("backward: loss must be a scalar tensor");
    loss->grad[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  }

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<std::function<void()>> nodes_;
};

}  // namespace ldct
