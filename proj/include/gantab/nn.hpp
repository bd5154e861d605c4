#pragma once

// Network building blocks on top of the autodiff graph: dense stacks with
// layer normalization, the gumbel-softmax head relaxation, and Adam.
// Parameters live as plain tensors inside the model structs; each training
// step wraps them into fresh leaf vars so graph nodes are never mutated.

#include <vector>

#include "gantab/autodiff.hpp"
#include "gantab/rng.hpp"

namespace gantab::nn {

using ad::Var;

enum class Activation { relu, leaky_relu };

// ---- tensor-level parameter containers -------------------------------------

template <class T>
struct Dense {
  Tensor<T> w;  // in x out
  Tensor<T> b;  // 1 x out
};

template <class T>
struct Norm {
  Tensor<T> gain;  // 1 x width
  Tensor<T> bias;  // 1 x width
};

// Hidden stack: repeated [dense -> layer norm -> activation].
template <class T>
struct Stack {
  std::vector<Dense<T>> dense;
  std::vector<Norm<T>> norm;
  Activation act = Activation::leaky_relu;
  double slope = 0.01;
};

// ---- var-level mirrors ------------------------------------------------------

template <class T>
struct DenseVars {
  Var<T> w, b;
};

template <class T>
struct NormVars {
  Var<T> gain, bias;
};

template <class T>
struct StackVars {
  std::vector<DenseVars<T>> dense;
  std::vector<NormVars<T>> norm;
  Activation act = Activation::leaky_relu;
  double slope = 0.01;
};

template <class T>
inline Var<T> wrap(const Tensor<T>& t, bool trainable) {
  return trainable ? ad::leaf(t) : ad::constant(t);
}

template <class T>
inline DenseVars<T> wrap(const Dense<T>& d, bool trainable) {
  return {wrap(d.w, trainable), wrap(d.b, trainable)};
}

template <class T>
inline NormVars<T> wrap(const Norm<T>& n, bool trainable) {
  return {wrap(n.gain, trainable), wrap(n.bias, trainable)};
}

template <class T>
inline StackVars<T> wrap(const Stack<T>& s, bool trainable) {
  StackVars<T> out;
  out.act = s.act;
  out.slope = s.slope;
  for (const auto& d : s.dense) out.dense.push_back(wrap(d, trainable));
  for (const auto& n : s.norm) out.norm.push_back(wrap(n, trainable));
  return out;
}

// ---- initialization ---------------------------------------------------------

template <class T>
inline Dense<T> init_dense(int fan_in, int fan_out, Rng& rng) {
  Dense<T> d{Tensor<T>(fan_in, fan_out), Tensor<T>(1, fan_out)};
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (auto& v : d.w.raw()) v = static_cast<T>(rng.uniform(-bound, bound));
  return d;
}

template <class T>
inline Norm<T> init_norm(int width) {
  Norm<T> n{Tensor<T>(1, width, T(1)), Tensor<T>(1, width, T(0))};
  return n;
}

template <class T>
inline Stack<T> init_stack(int input, const std::vector<int>& hidden, Activation act,
                           double slope, Rng& rng) {
  Stack<T> s;
  s.act = act;
  s.slope = slope;
  int in = input;
  for (int h : hidden) {
    s.dense.push_back(init_dense<T>(in, h, rng));
    s.norm.push_back(init_norm<T>(h));
    in = h;
  }
  return s;
}

// ---- forward helpers ----------------------------------------------------------

template <class T>
inline Var<T> linear(const DenseVars<T>& d, const Var<T>& x) {
  return ad::add(ad::matmul_v(x, d.w), d.b);
}

template <class T>
inline Var<T> layer_norm(const NormVars<T>& n, const Var<T>& x, double eps = 1e-5) {
  const int width = x->value.cols();
  auto mean = ad::scale(ad::sum_over_cols(x), 1.0 / width);
  auto centered = ad::sub(x, mean);
  auto var = ad::scale(ad::sum_over_cols(ad::square(centered)), 1.0 / width);
  auto normed = ad::divide(centered, ad::sqrt_v(ad::add_scalar(var, eps)));
  return ad::add(ad::mul(normed, n.gain), n.bias);
}

template <class T>
inline Var<T> activation(Activation act, double slope, const Var<T>& x) {
  return act == Activation::relu ? ad::relu(x) : ad::leaky_relu(x, slope);
}

template <class T>
inline Var<T> stack_forward(const StackVars<T>& s, Var<T> x) {
  for (std::size_t i = 0; i < s.dense.size(); ++i) {
    x = linear(s.dense[i], x);
    x = layer_norm(s.norm[i], x);
    x = activation(s.act, s.slope, x);
  }
  return x;
}

// Gumbel-softmax relaxation; noise is sampled here and enters the graph as a
// constant. Width-1 inputs collapse to an exact one.
template <class T>
inline Var<T> gumbel_softmax(const Var<T>& logits, double tau, Rng& rng) {
  Tensor<T> noise(logits->value.rows(), logits->value.cols());
  for (auto& v : noise.raw()) v = static_cast<T>(rng.gumbel());
  auto noisy = ad::add(logits, ad::constant(std::move(noise)));
  return ad::softmax_rows(ad::scale(noisy, 1.0 / tau));
}

// Row-wise L2 norm with a tiny guard inside the square root: a bare sqrt has
// an unbounded derivative at zero, which breaks the double backprop of the
// gradient penalty whenever the inner gradient vanishes.
template <class T>
inline Var<T> row_l2norm(const Var<T>& a) {
  return ad::sqrt_v(ad::add_scalar(ad::sum_over_cols(ad::square(a)), 1e-14));
}

// WGAN gradient penalty: mean over rows of (||d disc / d x_hat||_2 - 1)^2,
// differentiable in the discriminator parameters via double backprop.
template <class T, class DiscFn>
inline Var<T> gradient_penalty(DiscFn&& disc, const Var<T>& x_hat) {
  auto out = std::forward<DiscFn>(disc)(x_hat);
  auto inner = ad::grad(ad::sum_all(out), std::vector<Var<T>>{x_hat})[0];
  auto norm = row_l2norm(inner);
  return ad::mean_all(ad::square(ad::add_scalar(norm, -1.0)));
}

// ---- optimizer -------------------------------------------------------------

template <class T>
class Adam {
 public:
  Adam(double alpha, double beta1, double beta2, double eps = 1e-8)
      : alpha_(alpha), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update; `params` order must be identical every call.
  void step(const std::vector<Tensor<T>*>& params,
            const std::vector<Tensor<T>>& grads) {
    if (params.size() != grads.size()) throw Error("Adam: param/grad count mismatch");
    if (m_.empty()) {
      for (auto* p : params) {
        m_.push_back(Tensor<T>::zeros(p->rows(), p->cols()));
        v_.push_back(Tensor<T>::zeros(p->rows(), p->cols()));
      }
    }
    if (m_.size() != params.size()) throw Error("Adam: param count changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      const auto& g = grads[i];
      if (!p.same_shape(g)) throw Error("Adam: gradient shape mismatch");
      for (std::size_t k = 0; k < p.raw().size(); ++k) {
        const double gv = static_cast<double>(g.raw()[k]);
        double mv = beta1_ * static_cast<double>(m_[i].raw()[k]) + (1.0 - beta1_) * gv;
        double vv = beta2_ * static_cast<double>(v_[i].raw()[k]) + (1.0 - beta2_) * gv * gv;
        m_[i].raw()[k] = static_cast<T>(mv);
        v_[i].raw()[k] = static_cast<T>(vv);
        const double mhat = mv / bc1;
        const double vhat = vv / bc2;
        p.raw()[k] = static_cast<T>(static_cast<double>(p.raw()[k]) -
                                    alpha_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  long steps() const { return t_; }

 private:
  double alpha_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace gantab::nn
