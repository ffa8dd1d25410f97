#include "radloc/nn/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "radloc/common/error.hpp"

namespace radloc::nn {

std::size_t shape_size(const Shape& shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

void check_dims(const Shape& shape) {
  if (shape.empty()) throw ConfigError("tensor shape must have rank >= 1");
  for (auto d : shape) {
    if (d == 0) throw ConfigError("tensor dims must be >= 1, got " + shape_to_string(shape));
  }
}

}  // namespace

template <typename Scalar>
BasicTensor<Scalar>::BasicTensor(Shape shape, Scalar fill) : shape_(std::move(shape)) {
  check_dims(shape_);
  data_.assign(shape_size(shape_), fill);
}

template <typename Scalar>
BasicTensor<Scalar>::BasicTensor(Shape shape, std::vector<Scalar> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_dims(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                      " does not match shape " + shape_to_string(shape_));
  }
}

template <typename Scalar>
void BasicTensor<Scalar>::reshape(Shape shape) {
  check_dims(shape);
  if (shape_size(shape) != data_.size()) {
    throw ConfigError("cannot reshape " + shape_to_string(shape_) + " to " +
                      shape_to_string(shape));
  }
  shape_ = std::move(shape);
}

template <typename Scalar>
BasicTensor<Scalar> BasicTensor<Scalar>::reshaped(Shape shape) const {
  BasicTensor out = *this;
  out.reshape(std::move(shape));
  return out;
}

template <typename Scalar>
void BasicTensor<Scalar>::fill(Scalar value) {
  std::fill(data_.begin(), data_.end(), value);
}

template class BasicTensor<float>;
template class BasicTensor<double>;

}  // namespace radloc::nn
