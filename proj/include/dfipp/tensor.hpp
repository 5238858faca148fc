#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfipp/field.hpp"

namespace dfipp {

using EvalPoint = std::vector<Fe>;

// Dense tensor over a prime field, lexicographic cell order (first
// coordinate most significant), so row i is a contiguous slice.
struct InputTensor {
  PrimeField field;
  std::vector<size_t> dims;
  std::vector<Fe> data;

  InputTensor(const PrimeField& f, std::vector<size_t> shape);
  InputTensor(const PrimeField& f, std::vector<size_t> shape, std::vector<Fe> values);
  static InputTensor cube(const PrimeField& f, size_t k, size_t m);

  size_t size() const { return data.size(); }
  size_t order() const { return dims.size(); }
  size_t rows() const { return dims.empty() ? 1 : dims[0]; }
  size_t row_size() const;
  std::vector<size_t> row_dims() const;
  InputTensor row(size_t i) const;
  bool is_cube() const;
  // side length of a cube; 1 for an order-0 tensor
  size_t side() const;

  std::vector<size_t> unflatten(size_t index) const;
  size_t flatten(std::span<const size_t> coords) const;

  Fe operator[](size_t i) const { return data[i]; }

  friend bool operator==(const InputTensor& a, const InputTensor& b) {
    return a.field == b.field && a.dims == b.dims && a.data == b.data;
  }
};

size_t ipow(size_t base, size_t exp);

// Evaluates P_X at a point by contracting one coordinate at a time.
Fe lde_eval(const InputTensor& X, const EvalPoint& j);
std::vector<Fe> lde_eval_batch(const InputTensor& X, std::span<const EvalPoint> J);
// Coefficient row c with P_X(j) = sum_i c_i X_i.
std::vector<Fe> lde_coefficients(const PrimeField& f, size_t k, size_t m, const EvalPoint& j);

struct PvalInstance {
  PrimeField field;
  size_t k = 0;
  size_t m = 0;
  std::vector<EvalPoint> J;
  std::vector<Fe> v;

  size_t n() const { return ipow(k, m); }
  void validate() const;
};

bool pval_member(const InputTensor& X, const PvalInstance& inst);

EvalPoint embed_cell(const PrimeField& f, std::span<const size_t> coords);

}  // namespace dfipp
