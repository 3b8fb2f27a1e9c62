#include "tsc/neural/tensor.hpp"

#include <cmath>

#include "tsc/common/errors.hpp"

namespace tsc::nn {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> s, double fill) : shape(std::move(s)), values(shape_size(shape), fill) {}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
  if (values.size() != shape_size(shape))
    throw DimensionError("tensor values (" + std::to_string(values.size()) + ") do not match shape " +
                         shape_string(shape));
}

std::size_t Tensor::rows() const {
  if (shape.size() == 2) return shape[0];
  if (shape.size() == 1) return 1;
  throw DimensionError("rows() needs a rank-1 or rank-2 tensor, got " + shape_string(shape));
}

std::size_t Tensor::cols() const {
  if (shape.size() == 2) return shape[1];
  if (shape.size() == 1) return shape[0];
  throw DimensionError("cols() needs a rank-1 or rank-2 tensor, got " + shape_string(shape));
}

bool Tensor::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace tsc::nn
