#ifndef CROSSFUSE_TENSOR_H_
#define CROSSFUSE_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace crossfuse {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);

// Dense row-major array of doubles. Every dimension is positive and
// product(shape) == size().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  // Rank-1 tensor holding `values`.
  static Tensor Vector(std::vector<double> values);
  static Tensor Vector(std::initializer_list<double> values);
  // Rank-2 tensor from nested rows; all rows must have equal length.
  static Tensor Matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Dimension sizes for rank-2 tensors.
  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.at(1); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  void Fill(double v);
  bool AllFinite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Learnable tensor with its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Shape shape);

  void ZeroGrad() { grad.Fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
};

// Throws DimensionError unless both tensors are rank-1 of equal length.
void CheckSameVector(const Tensor& a, const Tensor& b, const char* op);

}  // namespace crossfuse

#endif  // CROSSFUSE_TENSOR_H_
