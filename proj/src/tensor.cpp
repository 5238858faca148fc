#include "dfipp/tensor.hpp"

#include <stdexcept>

namespace dfipp {

size_t ipow(size_t base, size_t exp) {
  size_t r = 1;
  for (size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

namespace {

size_t product(const std::vector<size_t>& dims) {
  size_t n = 1;
  for (size_t d : dims) n *= d;
  return n;
}

}  // namespace

InputTensor::InputTensor(const PrimeField& f, std::vector<size_t> shape)
    : field(f), dims(std::move(shape)), data(product(dims), Fe{0}) {}

InputTensor::InputTensor(const PrimeField& f, std::vector<size_t> shape, std::vector<Fe> values)
    : field(f), dims(std::move(shape)), data(std::move(values)) {
  if (data.size() != product(dims)) throw std::invalid_argument("tensor data does not match shape");
  for (Fe x : data) {
    if (!field.contains(x)) throw std::invalid_argument("tensor entry not reduced");
  }
}

InputTensor InputTensor::cube(const PrimeField& f, size_t k, size_t m) {
  return InputTensor(f, std::vector<size_t>(m, k));
}

size_t InputTensor::row_size() const { return dims.empty() ? 1 : data.size() / dims[0]; }

std::vector<size_t> InputTensor::row_dims() const {
  if (dims.empty()) throw std::logic_error("order-0 tensor has no rows");
  return std::vector<size_t>(dims.begin() + 1, dims.end());
}

InputTensor InputTensor::row(size_t i) const {
  if (i >= rows()) throw std::out_of_range("row index");
  size_t w = row_size();
  return InputTensor(field, row_dims(),
                     std::vector<Fe>(data.begin() + static_cast<long>(i * w),
                                     data.begin() + static_cast<long>((i + 1) * w)));
}

bool InputTensor::is_cube() const {
  for (size_t d : dims) {
    if (d != dims[0]) return false;
  }
  return true;
}

size_t InputTensor::side() const {
  if (!is_cube()) throw std::logic_error("tensor is not a cube");
  return dims.empty() ? 1 : dims[0];
}

std::vector<size_t> InputTensor::unflatten(size_t index) const {
  std::vector<size_t> c(dims.size());
  for (size_t t = dims.size(); t-- > 0;) {
    c[t] = index % dims[t];
    index /= dims[t];
  }
  return c;
}

size_t InputTensor::flatten(std::span<const size_t> coords) const {
  if (coords.size() != dims.size()) throw std::invalid_argument("coordinate count");
  size_t idx = 0;
  for (size_t t = 0; t < dims.size(); ++t) {
    if (coords[t] >= dims[t]) throw std::out_of_range("coordinate");
    idx = idx * dims[t] + coords[t];
  }
  return idx;
}

Fe lde_eval(const InputTensor& X, const EvalPoint& j) {
  if (j.size() != X.order()) throw std::invalid_argument("evaluation point dimension mismatch");
  if (X.order() == 0) return X.data[0];
  const PrimeField& f = X.field;
  size_t k = X.side();
  LagrangeBasis basis(f, k);
  std::vector<Fe> cur = X.data;
  for (size_t t = 0; t < j.size(); ++t) {
    if (!f.contains(j[t])) throw std::invalid_argument("point coordinate not reduced");
    auto L = basis.at(j[t]);
    size_t rest = cur.size() / k;
    std::vector<Fe> next(rest, f.zero());
    for (size_t i = 0; i < k; ++i) {
      if (L[i].v == 0) continue;
      for (size_t r = 0; r < rest; ++r) next[r] = f.add(next[r], f.mul(L[i], cur[i * rest + r]));
    }
    cur.swap(next);
  }
  return cur[0];
}

std::vector<Fe> lde_eval_batch(const InputTensor& X, std::span<const EvalPoint> J) {
  std::vector<Fe> out;
  out.reserve(J.size());
  for (const auto& j : J) out.push_back(lde_eval(X, j));
  return out;
}

std::vector<Fe> lde_coefficients(const PrimeField& f, size_t k, size_t m, const EvalPoint& j) {
  if (j.size() != m) throw std::invalid_argument("evaluation point dimension mismatch");
  LagrangeBasis basis(f, k);
  std::vector<Fe> c{f.one()};
  for (size_t t = 0; t < m; ++t) {
    auto L = basis.at(j[t]);
    std::vector<Fe> next(c.size() * k);
    for (size_t a = 0; a < c.size(); ++a) {
      for (size_t i = 0; i < k; ++i) next[a * k + i] = f.mul(c[a], L[i]);
    }
    c.swap(next);
  }
  return c;
}

void PvalInstance::validate() const {
  if (J.size() != v.size()) throw std::invalid_argument("|J| != |v|");
  if (k == 0 || k > field.modulus()) throw std::invalid_argument("need 1 <= k <= |F|");
  for (const auto& j : J) {
    if (j.size() != m) throw std::invalid_argument("point dimension differs from m");
    for (Fe x : j) {
      if (!field.contains(x)) throw std::invalid_argument("point coordinate not reduced");
    }
  }
  for (Fe x : v) {
    if (!field.contains(x)) throw std::invalid_argument("value not reduced");
  }
}

bool pval_member(const InputTensor& X, const PvalInstance& inst) {
  if (!(X.field == inst.field) || X.order() != inst.m || X.side() != inst.k) {
    throw std::invalid_argument("tensor shape or field differs from instance");
  }
  inst.validate();
  for (size_t i = 0; i < inst.J.size(); ++i) {
    if (lde_eval(X, inst.J[i]) != inst.v[i]) return false;
  }
  return true;
}

EvalPoint embed_cell(const PrimeField& f, std::span<const size_t> coords) {
  EvalPoint p;
  p.reserve(coords.size());
  for (size_t c : coords) p.push_back(f.of(c));
  return p;
}

}  // namespace dfipp
