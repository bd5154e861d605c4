#pragma once

// Reverse-mode automatic differentiation on a dynamically recorded graph.
//
// Gradients are themselves built out of recorded ops (every vjp is composed
// from the public op set), so differentiating through a gradient — as the
// WGAN gradient penalty requires — falls out for free: call ad::grad once to
// get gradient vars, build more ops on top, and call ad::grad again.
//
// Nodes are immutable after creation; parameters enter a step as fresh leaf
// vars and the graph for a step is dropped when the last Var goes out of
// scope. Shapes are 2-D everywhere; scalars are 1x1.

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gantab/tensor.hpp"

namespace gantab::ad {

template <class T>
struct Node;

template <class T>
using Var = std::shared_ptr<Node<T>>;

template <class T>
struct Node {
  Tensor<T> value;
  std::vector<Var<T>> parents;
  // Upstream gradient and the node's own var; returns one gradient var per
  // parent (nullptr for slots that receive nothing). Kept free of self
  // captures so the shared_ptr graph stays acyclic.
  std::function<std::vector<Var<T>>(const Var<T>&, const Var<T>&)> vjp;
  bool requires_grad = false;
};

// Toggle for non-finite detection after every op (tests and verification
// runs switch it on; it is cheap relative to the matmuls either way).
inline bool& finite_checks() {
  static bool enabled = false;
  return enabled;
}

template <class T>
inline Var<T> make_node(Tensor<T> value, std::vector<Var<T>> parents,
                        std::function<std::vector<Var<T>>(const Var<T>&, const Var<T>&)> vjp,
                        const char* op_name) {
  if (finite_checks() && !value.all_finite())
    throw Error(std::string("non-finite values produced by op ") + op_name);
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->vjp = std::move(vjp);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

template <class T>
inline Var<T> constant(Tensor<T> value) {
  return make_node<T>(std::move(value), {}, nullptr, "constant");
}

template <class T>
inline Var<T> leaf(Tensor<T> value) {
  auto n = make_node<T>(std::move(value), {}, nullptr, "leaf");
  n->requires_grad = true;
  return n;
}

template <class T>
inline Var<T> detach(const Var<T>& a) {
  return constant<T>(a->value);
}

// ---- shape helpers ----------------------------------------------------

inline void broadcast_shape(int ar, int ac, int br, int bc, int& r, int& c) {
  if (ar != br && ar != 1 && br != 1) throw Error("broadcast row mismatch");
  if (ac != bc && ac != 1 && bc != 1) throw Error("broadcast col mismatch");
  r = ar == 1 ? br : ar;
  c = ac == 1 ? bc : ac;
}

template <class T, class F>
inline Tensor<T> elementwise_binary(const Tensor<T>& a, const Tensor<T>& b, F f) {
  int r, c;
  broadcast_shape(a.rows(), a.cols(), b.rows(), b.cols(), r, c);
  Tensor<T> out(r, c);
  for (int i = 0; i < r; ++i) {
    const int ia = a.rows() == 1 ? 0 : i;
    const int ib = b.rows() == 1 ? 0 : i;
    for (int j = 0; j < c; ++j) {
      const int ja = a.cols() == 1 ? 0 : j;
      const int jb = b.cols() == 1 ? 0 : j;
      out(i, j) = f(a(ia, ja), b(ib, jb));
    }
  }
  return out;
}

template <class T>
Var<T> sum_over_rows(const Var<T>& a);
template <class T>
Var<T> sum_over_cols(const Var<T>& a);
template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
template <class T>
Var<T> concat_cols(const std::vector<Var<T>>& parts);
template <class T>
Var<T> slice_cols(const Var<T>& a, int offset, int width);

// Collapses broadcast dimensions of g back to (rows, cols).
template <class T>
inline Var<T> reduce_to_shape(Var<T> g, int rows, int cols) {
  if (g->value.rows() != rows) {
    if (rows != 1) throw Error("reduce_to_shape row mismatch");
    g = sum_over_rows(g);
  }
  if (g->value.cols() != cols) {
    if (cols != 1) throw Error("reduce_to_shape col mismatch");
    g = sum_over_cols(g);
  }
  return g;
}

// ---- arithmetic ---------------------------------------------------------

template <class T>
inline Var<T> add(const Var<T>& a, const Var<T>& b) {
  auto value = elementwise_binary<T>(a->value, b->value, [](T x, T y) { return x + y; });
  return make_node<T>(std::move(value), {a, b},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        const auto& pb = self->parents[1];
        return {reduce_to_shape(g, pa->value.rows(), pa->value.cols()),
                reduce_to_shape(g, pb->value.rows(), pb->value.cols())};
      },
      "add");
}

template <class T>
inline Var<T> scale(const Var<T>& a, double s);

template <class T>
inline Var<T> sub(const Var<T>& a, const Var<T>& b) {
  auto value = elementwise_binary<T>(a->value, b->value, [](T x, T y) { return x - y; });
  return make_node<T>(std::move(value), {a, b},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        const auto& pb = self->parents[1];
        return {reduce_to_shape(g, pa->value.rows(), pa->value.cols()),
                reduce_to_shape(scale(g, -1.0), pb->value.rows(), pb->value.cols())};
      },
      "sub");
}

template <class T>
inline Var<T> mul(const Var<T>& a, const Var<T>& b) {
  auto value = elementwise_binary<T>(a->value, b->value, [](T x, T y) { return x * y; });
  return make_node<T>(std::move(value), {a, b},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        const auto& pb = self->parents[1];
        return {reduce_to_shape(mul(g, pb), pa->value.rows(), pa->value.cols()),
                reduce_to_shape(mul(g, pa), pb->value.rows(), pb->value.cols())};
      },
      "mul");
}

template <class T>
inline Var<T> divide(const Var<T>& a, const Var<T>& b) {
  auto value = elementwise_binary<T>(a->value, b->value, [](T x, T y) { return x / y; });
  return make_node<T>(std::move(value), {a, b},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        const auto& pb = self->parents[1];
        auto ga = reduce_to_shape(divide(g, pb), pa->value.rows(), pa->value.cols());
        auto gb = reduce_to_shape(
            scale(mul(g, divide(pa, mul(pb, pb))), -1.0),
            pb->value.rows(), pb->value.cols());
        return {ga, gb};
      },
      "divide");
}

template <class T>
inline Var<T> scale(const Var<T>& a, double s) {
  Tensor<T> value = a->value;
  for (auto& v : value.raw()) v = static_cast<T>(v * static_cast<T>(s));
  return make_node<T>(std::move(value), {a},
      [s](const Var<T>& g, const Var<T>&) -> std::vector<Var<T>> {
        return {scale(g, s)};
      },
      "scale");
}

template <class T>
inline Var<T> add_scalar(const Var<T>& a, double s) {
  Tensor<T> value = a->value;
  for (auto& v : value.raw()) v = static_cast<T>(v + static_cast<T>(s));
  return make_node<T>(std::move(value), {a},
      [](const Var<T>& g, const Var<T>&) -> std::vector<Var<T>> { return {g}; },
      "add_scalar");
}

template <class T>
inline Var<T> neg(const Var<T>& a) {
  return scale(a, -1.0);
}

template <class T>
inline Var<T> square(const Var<T>& a) {
  return mul(a, a);
}

// ---- linear algebra -----------------------------------------------------

template <class T>
inline Var<T> transpose_v(const Var<T>& a) {
  return make_node<T>(transpose(a->value), {a},
      [](const Var<T>& g, const Var<T>&) -> std::vector<Var<T>> {
        return {transpose_v(g)};
      },
      "transpose");
}

template <class T>
inline Var<T> matmul_v(const Var<T>& a, const Var<T>& b) {
  return make_node<T>(matmul(a->value, b->value), {a, b},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        const auto& pb = self->parents[1];
        return {matmul_v(g, transpose_v(pb)), matmul_v(transpose_v(pa), g)};
      },
      "matmul");
}

// ---- reductions -----------------------------------------------------------

template <class T>
inline Var<T> sum_all(const Var<T>& a) {
  T total = T(0);
  for (T v : a->value.raw()) total += v;
  return make_node<T>(Tensor<T>::scalar(total), {a},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        return {mul(g, constant(Tensor<T>::ones(pa->value.rows(), pa->value.cols())))};
      },
      "sum_all");
}

// R x C -> 1 x C
template <class T>
inline Var<T> sum_over_rows(const Var<T>& a) {
  const auto& v = a->value;
  Tensor<T> out(1, v.cols());
  for (int r = 0; r < v.rows(); ++r)
    for (int c = 0; c < v.cols(); ++c) out(0, c) += v(r, c);
  return make_node<T>(std::move(out), {a},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        return {mul(g, constant(Tensor<T>::ones(pa->value.rows(), pa->value.cols())))};
      },
      "sum_over_rows");
}

// R x C -> R x 1
template <class T>
inline Var<T> sum_over_cols(const Var<T>& a) {
  const auto& v = a->value;
  Tensor<T> out(v.rows(), 1);
  for (int r = 0; r < v.rows(); ++r) {
    T acc = T(0);
    for (int c = 0; c < v.cols(); ++c) acc += v(r, c);
    out(r, 0) = acc;
  }
  return make_node<T>(std::move(out), {a},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        return {mul(g, constant(Tensor<T>::ones(pa->value.rows(), pa->value.cols())))};
      },
      "sum_over_cols");
}

template <class T>
inline Var<T> mean_all(const Var<T>& a) {
  return scale(sum_all(a), 1.0 / static_cast<double>(a->value.size()));
}

// ---- pointwise nonlinearities --------------------------------------------

template <class T>
inline Var<T> exp_v(const Var<T>& a) {
  Tensor<T> value = a->value;
  for (auto& v : value.raw()) v = std::exp(v);
  return make_node<T>(std::move(value), {a},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        return {mul(g, self)};
      },
      "exp");
}

template <class T>
inline Var<T> log_v(const Var<T>& a) {
  Tensor<T> value = a->value;
  for (auto& v : value.raw()) v = std::log(v);
  return make_node<T>(std::move(value), {a},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        return {divide(g, self->parents[0])};
      },
      "log");
}

template <class T>
inline Var<T> sqrt_v(const Var<T>& a) {
  Tensor<T> value = a->value;
  for (auto& v : value.raw()) v = std::sqrt(v);
  return make_node<T>(std::move(value), {a},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        return {divide(g, scale(self, 2.0))};
      },
      "sqrt");
}

template <class T>
inline Var<T> tanh_v(const Var<T>& a) {
  Tensor<T> value = a->value;
  for (auto& v : value.raw()) v = std::tanh(v);
  return make_node<T>(std::move(value), {a},
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        return {mul(g, add_scalar(scale(square(self), -1.0), 1.0))};
      },
      "tanh");
}

// Derivative masks are constants: differentiating through them a second time
// correctly contributes zero.
template <class T>
inline Var<T> leaky_relu(const Var<T>& a, double slope) {
  Tensor<T> value = a->value;
  Tensor<T> mask(value.rows(), value.cols());
  for (std::size_t i = 0; i < value.raw().size(); ++i) {
    const bool pos = a->value.raw()[i] > T(0);
    mask.raw()[i] = pos ? T(1) : static_cast<T>(slope);
    if (!pos) value.raw()[i] = static_cast<T>(value.raw()[i] * static_cast<T>(slope));
  }
  auto mask_var = constant(std::move(mask));
  return make_node<T>(std::move(value), {a},
      [mask_var](const Var<T>& g, const Var<T>&) -> std::vector<Var<T>> {
        return {mul(g, mask_var)};
      },
      "leaky_relu");
}

template <class T>
inline Var<T> relu(const Var<T>& a) {
  return leaky_relu(a, 0.0);
}

// ---- structure ------------------------------------------------------------

template <class T>
inline Var<T> slice_cols(const Var<T>& a, int offset, int width) {
  const auto& v = a->value;
  if (offset < 0 || width < 0 || offset + width > v.cols())
    throw Error("slice_cols out of range");
  Tensor<T> out(v.rows(), width);
  for (int r = 0; r < v.rows(); ++r)
    for (int c = 0; c < width; ++c) out(r, c) = v(r, offset + c);
  return make_node<T>(std::move(out), {a},
      [offset, width](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        const auto& pa = self->parents[0];
        const int rows = pa->value.rows();
        const int cols = pa->value.cols();
        std::vector<Var<T>> parts;
        if (offset > 0) parts.push_back(constant(Tensor<T>::zeros(rows, offset)));
        parts.push_back(g);
        if (cols - offset - width > 0)
          parts.push_back(constant(Tensor<T>::zeros(rows, cols - offset - width)));
        return {concat_cols(parts)};
      },
      "slice_cols");
}

template <class T>
inline Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw Error("concat_cols on empty list");
  const int rows = parts[0]->value.rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p->value.rows() != rows) throw Error("concat_cols row mismatch");
    cols += p->value.cols();
  }
  Tensor<T> out(rows, cols);
  int off = 0;
  for (const auto& p : parts) {
    const auto& v = p->value;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < v.cols(); ++c) out(r, off + c) = v(r, c);
    off += v.cols();
  }
  return make_node<T>(std::move(out), parts,
      [](const Var<T>& g, const Var<T>& self) -> std::vector<Var<T>> {
        std::vector<Var<T>> grads;
        int off = 0;
        for (const auto& p : self->parents) {
          grads.push_back(slice_cols(g, off, p->value.cols()));
          off += p->value.cols();
        }
        return grads;
      },
      "concat_cols");
}

// Per-row maximum as a detached R x 1 constant (used to stabilize softmax;
// subtracting any constant leaves softmax and its gradients unchanged).
template <class T>
inline Var<T> row_max_const(const Var<T>& a) {
  const auto& v = a->value;
  if (v.cols() == 0) throw Error("row_max_const on empty tensor");
  Tensor<T> out(v.rows(), 1);
  for (int r = 0; r < v.rows(); ++r) {
    T m = v(r, 0);
    for (int c = 1; c < v.cols(); ++c) m = std::max(m, v(r, c));
    out(r, 0) = m;
  }
  return constant(std::move(out));
}

template <class T>
inline Var<T> softmax_rows(const Var<T>& a) {
  auto shifted = sub(a, row_max_const(a));
  auto e = exp_v(shifted);
  return divide(e, sum_over_cols(e));
}

// ---- backward -------------------------------------------------------------

// d(loss)/d(each target), as graph-recorded vars. Loss must be scalar.
// Targets that the loss does not reach get zero gradients.
template <class T>
inline std::vector<Var<T>> grad(const Var<T>& loss, const std::vector<Var<T>>& targets) {
  if (loss->value.size() != 1) throw Error("grad requires a scalar loss");

  // Reverse postorder over parent edges = consumers before producers.
  std::vector<Var<T>> topo;
  std::unordered_set<const Node<T>*> visited;
  if (loss->requires_grad) {
    std::vector<std::pair<Var<T>, std::size_t>> stack;
    stack.emplace_back(loss, 0);
    visited.insert(loss.get());
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < v->parents.size()) {
        const auto& p = v->parents[i++];
        if (p->requires_grad && !visited.count(p.get())) {
          visited.insert(p.get());
          stack.emplace_back(p, 0);
        }
      } else {
        topo.push_back(v);
        stack.pop_back();
      }
    }
  }

  std::unordered_map<const Node<T>*, Var<T>> accum;
  accum[loss.get()] = constant(Tensor<T>::ones(1, 1));
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const Var<T>& v = *it;
    auto found = accum.find(v.get());
    if (found == accum.end()) continue;
    if (!v->vjp || v->parents.empty()) continue;
    auto parts = v->vjp(found->second, v);
    if (parts.size() != v->parents.size())
      throw Error("vjp returned wrong number of gradients");
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto& p = v->parents[k];
      if (!p->requires_grad || !parts[k]) continue;
      if (!parts[k]->value.same_shape(p->value))
        throw Error("vjp gradient shape mismatch");
      auto slot = accum.find(p.get());
      if (slot == accum.end()) accum.emplace(p.get(), parts[k]);
      else slot->second = add(slot->second, parts[k]);
    }
  }

  std::vector<Var<T>> out;
  out.reserve(targets.size());
  for (const auto& t : targets) {
    auto found = accum.find(t.get());
    if (found != accum.end()) out.push_back(found->second);
    else out.push_back(constant(Tensor<T>::zeros(t->value.rows(), t->value.cols())));
  }
  return out;
}

}  // namespace gantab::ad
