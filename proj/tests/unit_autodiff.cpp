#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "gantab/autodiff.hpp"
#include "gantab/nn.hpp"
#include "gantab/rng.hpp"

using namespace gantab;
using ad::Var;

namespace {

Tensor<double> random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
  Tensor<double> t(r, c);
  for (auto& v : t.raw()) v = rng.uniform(-scale, scale);
  return t;
}

// Central finite differences of a scalar function of several tensors against
// the analytic gradients from one recorded graph.
void check_gradients(std::vector<Tensor<double>*> inputs,
                     const std::function<double()>& value_of,
                     const std::vector<Tensor<double>>& analytic,
                     double h = 1e-6, double tol = 1e-6) {
  REQUIRE(inputs.size() == analytic.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Tensor<double>& x = *inputs[i];
    REQUIRE(analytic[i].same_shape(x));
    for (int r = 0; r < x.rows(); ++r) {
      for (int c = 0; c < x.cols(); ++c) {
        const double orig = x(r, c);
        x(r, c) = orig + h;
        const double fp = value_of();
        x(r, c) = orig - h;
        const double fm = value_of();
        x(r, c) = orig;
        const double fd = (fp - fm) / (2.0 * h);
        const double an = analytic[i](r, c);
        const double err = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1.0});
        INFO("input " << i << " entry (" << r << "," << c << ") fd=" << fd
                      << " analytic=" << an);
        CHECK(err < tol);
      }
    }
  }
}

}  // namespace

TEST_CASE("forward values: arithmetic and broadcasting") {
  auto a = ad::constant(Tensor<double>::from({1, 2, 3, 4}, 2, 2));
  auto row = ad::constant(Tensor<double>::from({10, 20}, 1, 2));
  auto col = ad::constant(Tensor<double>::from({100, 200}, 2, 1));
  auto s = ad::add(ad::add(a, row), col);
  CHECK(s->value(0, 0) == 111);
  CHECK(s->value(0, 1) == 122);
  CHECK(s->value(1, 0) == 213);
  CHECK(s->value(1, 1) == 224);

  auto p = ad::mul(a, row);
  CHECK(p->value(1, 1) == 80);
  auto d = ad::divide(a, col);
  CHECK(d->value(1, 0) == doctest::Approx(3.0 / 200));

  CHECK(ad::sum_all(a)->value.item() == 10);
  CHECK(ad::mean_all(a)->value.item() == 2.5);
  auto sr = ad::sum_over_rows(a);
  CHECK(sr->value(0, 0) == 4);
  CHECK(sr->value(0, 1) == 6);
  auto sc = ad::sum_over_cols(a);
  CHECK(sc->value(0, 0) == 3);
  CHECK(sc->value(1, 0) == 7);

  CHECK_THROWS_AS(ad::add(a, ad::constant(Tensor<double>::zeros(3, 2))), Error);
}

TEST_CASE("forward values: matmul transpose slice concat") {
  auto a = ad::constant(Tensor<double>::from({1, 2, 3, 4, 5, 6}, 2, 3));
  auto b = ad::constant(Tensor<double>::from({7, 8, 9, 10, 11, 12}, 3, 2));
  auto m = ad::matmul_v(a, b);
  CHECK(m->value(0, 0) == 58);
  CHECK(m->value(0, 1) == 64);
  CHECK(m->value(1, 0) == 139);
  CHECK(m->value(1, 1) == 154);

  auto t = ad::transpose_v(a);
  CHECK(t->value(2, 1) == 6);

  auto s = ad::slice_cols(a, 1, 2);
  CHECK(s->value(0, 0) == 2);
  CHECK(s->value(1, 1) == 6);
  auto cc = ad::concat_cols<double>({s, ad::slice_cols(a, 0, 1)});
  CHECK(cc->value(0, 2) == 1);
  CHECK(cc->value.cols() == 3);
}

TEST_CASE("softmax rows: simplex output and stability") {
  auto logits = ad::constant(Tensor<double>::from({1000, 1001, 1002, -5, 0, 5}, 2, 3));
  auto p = ad::softmax_rows(logits);
  for (int r = 0; r < 2; ++r) {
    double total = 0;
    for (int c = 0; c < 3; ++c) {
      CHECK(p->value(r, c) > 0);
      total += p->value(r, c);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  // width-1 softmax collapses to exactly one
  auto one = ad::softmax_rows(ad::constant(Tensor<double>::from({3.7}, 1, 1)));
  CHECK(one->value.item() == 1.0);
}

TEST_CASE("gradients: elementwise chain with broadcasting vs finite differences") {
  Rng rng(5);
  Tensor<double> a = random_tensor(3, 4, rng);
  Tensor<double> b = random_tensor(3, 4, rng);
  Tensor<double> row = random_tensor(1, 4, rng);
  Tensor<double> col = random_tensor(3, 1, rng);
  for (auto& v : b.raw()) v += 3.0;  // keep divisors away from zero

  auto build = [&](bool record) {
    auto va = record ? ad::leaf(a) : ad::constant(a);
    auto vb = record ? ad::leaf(b) : ad::constant(b);
    auto vrow = record ? ad::leaf(row) : ad::constant(row);
    auto vcol = record ? ad::leaf(col) : ad::constant(col);
    auto t = ad::tanh_v(ad::add(ad::mul(va, vrow), vcol));
    auto u = ad::divide(t, vb);
    auto w = ad::exp_v(ad::scale(u, 0.3));
    auto lg = ad::log_v(ad::add_scalar(ad::square(w), 1.0));
    auto sq = ad::sqrt_v(ad::add_scalar(ad::sum_over_cols(lg), 0.5));
    auto loss = ad::mean_all(ad::sub(sq, vcol));
    return std::make_tuple(loss, va, vb, vrow, vcol);
  };

  auto [loss, va, vb, vrow, vcol] = build(true);
  auto grads = ad::grad(loss, {va, vb, vrow, vcol});
  check_gradients({&a, &b, &row, &col},
                  [&] { return std::get<0>(build(false))->value.item(); },
                  {grads[0]->value, grads[1]->value, grads[2]->value, grads[3]->value});
}

TEST_CASE("gradients: matmul layer_norm leaky_relu mlp vs finite differences") {
  Rng rng(17);
  Tensor<double> x = random_tensor(4, 5, rng);
  nn::Stack<double> stack = nn::init_stack<double>(5, {8, 3}, nn::Activation::leaky_relu, 0.01, rng);
  nn::Dense<double> head = nn::init_dense<double>(3, 1, rng);

  auto value_of = [&] {
    auto vars = nn::wrap(stack, false);
    auto hv = nn::wrap(head, false);
    auto h = nn::stack_forward(vars, ad::constant(x));
    return ad::mean_all(nn::linear(hv, h))->value.item();
  };

  auto vars = nn::wrap(stack, true);
  auto hv = nn::wrap(head, true);
  auto h = nn::stack_forward(vars, ad::constant(x));
  auto loss = ad::mean_all(nn::linear(hv, h));

  std::vector<Var<double>> targets;
  std::vector<Tensor<double>*> tensors;
  for (std::size_t i = 0; i < stack.dense.size(); ++i) {
    targets.push_back(vars.dense[i].w);
    tensors.push_back(&stack.dense[i].w);
    targets.push_back(vars.dense[i].b);
    tensors.push_back(&stack.dense[i].b);
    targets.push_back(vars.norm[i].gain);
    tensors.push_back(&stack.norm[i].gain);
    targets.push_back(vars.norm[i].bias);
    tensors.push_back(&stack.norm[i].bias);
  }
  targets.push_back(hv.w);
  tensors.push_back(&head.w);
  targets.push_back(hv.b);
  tensors.push_back(&head.b);

  auto grads = ad::grad(loss, targets);
  std::vector<Tensor<double>> analytic;
  for (auto& g : grads) analytic.push_back(g->value);
  check_gradients(tensors, value_of, analytic, 1e-6, 2e-5);
}

TEST_CASE("gradients: softmax cross entropy vs finite differences") {
  Rng rng(23);
  Tensor<double> logits = random_tensor(5, 4, rng, 2.0);
  Tensor<double> q = Tensor<double>::zeros(5, 4);
  for (int r = 0; r < 5; ++r) q(r, static_cast<int>(rng.below(4))) = 1.0;

  auto value_of = [&] {
    auto p = ad::softmax_rows(ad::constant(logits));
    auto ce = ad::neg(ad::sum_all(ad::mul(ad::constant(q), ad::log_v(p))));
    return ce->value.item();
  };
  auto vl = ad::leaf(logits);
  auto p = ad::softmax_rows(vl);
  auto loss = ad::neg(ad::sum_all(ad::mul(ad::constant(q), ad::log_v(p))));
  auto g = ad::grad(loss, {vl})[0];

  // closed form: softmax(logits) - q
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 4; ++c)
      CHECK(g->value(r, c) == doctest::Approx(p->value(r, c) - q(r, c)).epsilon(1e-10));
  check_gradients({&logits}, value_of, {g->value});
}

TEST_CASE("gradients: gumbel softmax with fixed noise vs finite differences") {
  Rng init(31);
  Tensor<double> logits = random_tensor(4, 3, init, 1.5);
  auto value_of = [&] {
    Rng rng(777);
    auto y = nn::gumbel_softmax(ad::constant(logits), 0.8, rng);
    auto w = ad::constant(Tensor<double>::from({0.3, -1.2, 0.7}, 1, 3));
    return ad::sum_all(ad::mul(y, w))->value.item();
  };
  Rng rng(777);
  auto vl = ad::leaf(logits);
  auto y = nn::gumbel_softmax(vl, 0.8, rng);
  auto w = ad::constant(Tensor<double>::from({0.3, -1.2, 0.7}, 1, 3));
  auto loss = ad::sum_all(ad::mul(y, w));
  auto g = ad::grad(loss, {vl})[0];
  check_gradients({&logits}, value_of, {g->value});
}

TEST_CASE("gradients: slice and concat route correctly") {
  Rng rng(41);
  Tensor<double> a = random_tensor(3, 6, rng);
  auto value_of = [&] {
    auto v = ad::constant(a);
    auto left = ad::slice_cols(v, 0, 2);
    auto right = ad::slice_cols(v, 4, 2);
    auto joined = ad::concat_cols<double>({right, left});
    return ad::mean_all(ad::tanh_v(ad::mul(joined, joined)))->value.item();
  };
  auto v = ad::leaf(a);
  auto left = ad::slice_cols(v, 0, 2);
  auto right = ad::slice_cols(v, 4, 2);
  auto joined = ad::concat_cols<double>({right, left});
  auto loss = ad::mean_all(ad::tanh_v(ad::mul(joined, joined)));
  auto g = ad::grad(loss, {v})[0];
  // middle columns receive exactly zero
  for (int r = 0; r < 3; ++r) {
    CHECK(g->value(r, 2) == 0.0);
    CHECK(g->value(r, 3) == 0.0);
  }
  check_gradients({&a}, value_of, {g->value});
}

TEST_CASE("double backprop: analytic second derivative through tanh") {
  // y = sum(tanh(x)); s = sum((dy/dx)^2); ds/dx = -4 t (1 - t^2)^2 with t = tanh(x)
  Tensor<double> x = Tensor<double>::from({0.3, -0.7, 1.2, 0.05}, 2, 2);
  auto vx = ad::leaf(x);
  auto y = ad::sum_all(ad::tanh_v(vx));
  auto dy = ad::grad(y, {vx})[0];
  auto s = ad::sum_all(ad::square(dy));
  auto ds = ad::grad(s, {vx})[0];
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double t = std::tanh(x(r, c));
      const double expect = -4.0 * t * (1 - t * t) * (1 - t * t);
      CHECK(ds->value(r, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient penalty: linear discriminator closed form") {
  // D(x) = x w + b: the inner gradient is w for every row, so the penalty is
  // (||w|| - 1)^2 and its parameter gradient is 2 (||w|| - 1) w / ||w||.
  Rng rng(53);
  Tensor<double> w = random_tensor(6, 1, rng);
  Tensor<double> b = random_tensor(1, 1, rng);
  Tensor<double> x = random_tensor(5, 6, rng);

  auto vw = ad::leaf(w);
  auto vb = ad::leaf(b);
  auto x_hat = ad::leaf(x);
  auto penalty = nn::gradient_penalty(
      [&](const Var<double>& in) { return ad::add(ad::matmul_v(in, vw), vb); }, x_hat);

  double norm_sq = 0;
  for (auto v : w.raw()) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  CHECK(std::abs(penalty->value.item() - (norm - 1) * (norm - 1)) < 1e-12);

  auto grads = ad::grad(penalty, {vw, vb, x_hat});
  for (int i = 0; i < 6; ++i) {
    const double expect = 2.0 * (norm - 1.0) * w(i, 0) / norm;
    CHECK(std::abs(grads[0]->value(i, 0) - expect) < 1e-12);
  }
  CHECK(grads[1]->value.item() == 0.0);  // bias drops out of the inner gradient
  for (auto v : grads[2]->value.raw()) CHECK(v == 0.0);  // penalty constant in x for linear D
}

TEST_CASE("gradient penalty: constant discriminator is penalty 1 with zero grads") {
  Tensor<double> x = Tensor<double>::from({1, 2, 3, 4}, 2, 2);
  auto x_hat = ad::leaf(x);
  Tensor<double> w = Tensor<double>::zeros(2, 1);
  auto vw = ad::leaf(w);
  auto penalty = nn::gradient_penalty(
      [&](const Var<double>& in) { return ad::matmul_v(in, vw); }, x_hat);
  CHECK(penalty->value.item() == doctest::Approx(1.0).epsilon(1e-5));
  auto g = ad::grad(penalty, {vw})[0];
  for (auto v : g->value.raw()) {
    CHECK(std::isfinite(v));
    CHECK(v == 0.0);
  }
}

TEST_CASE("gradient penalty: finite differences through an mlp discriminator") {
  Rng rng(67);
  Tensor<double> x = random_tensor(6, 5, rng);
  nn::Stack<double> stack = nn::init_stack<double>(5, {7, 4}, nn::Activation::relu, 0.0, rng);
  nn::Dense<double> head = nn::init_dense<double>(4, 1, rng);

  auto penalty_value = [&](bool record, std::vector<Var<double>>* targets,
                           std::vector<Tensor<double>*>* tensors) {
    auto vars = nn::wrap(stack, record);
    auto hv = nn::wrap(head, record);
    if (targets) {
      for (std::size_t i = 0; i < stack.dense.size(); ++i) {
        targets->push_back(vars.dense[i].w);
        tensors->push_back(&stack.dense[i].w);
        targets->push_back(vars.dense[i].b);
        tensors->push_back(&stack.dense[i].b);
        targets->push_back(vars.norm[i].gain);
        tensors->push_back(&stack.norm[i].gain);
        targets->push_back(vars.norm[i].bias);
        tensors->push_back(&stack.norm[i].bias);
      }
      targets->push_back(hv.w);
      tensors->push_back(&head.w);
      targets->push_back(hv.b);
      tensors->push_back(&head.b);
    }
    auto x_hat = ad::leaf(x);
    return nn::gradient_penalty(
        [&](const Var<double>& in) { return nn::linear(hv, nn::stack_forward(vars, in)); },
        x_hat);
  };

  std::vector<Var<double>> targets;
  std::vector<Tensor<double>*> tensors;
  auto penalty = penalty_value(true, &targets, &tensors);
  CHECK(penalty->value.item() > 0.0);
  auto grads = ad::grad(penalty, targets);
  std::vector<Tensor<double>> analytic;
  for (auto& g : grads) analytic.push_back(g->value);
  check_gradients(tensors,
                  [&] { return penalty_value(false, nullptr, nullptr)->value.item(); },
                  analytic, 1e-5, 2e-4);
}

TEST_CASE("grad: unreachable targets get zeros; non-scalar loss rejected") {
  auto a = ad::leaf(Tensor<double>::from({1, 2}, 1, 2));
  auto b = ad::leaf(Tensor<double>::from({3, 4}, 1, 2));
  auto loss = ad::sum_all(ad::square(a));
  auto g = ad::grad(loss, {a, b});
  CHECK(g[0]->value(0, 0) == 2.0);
  CHECK(g[1]->value(0, 0) == 0.0);
  CHECK(g[1]->value(0, 1) == 0.0);
  CHECK_THROWS_AS(ad::grad(ad::square(a), {a}), Error);
}

TEST_CASE("layer_norm: normalizes rows to gain/bias") {
  Rng rng(71);
  Tensor<double> x = random_tensor(3, 8, rng, 5.0);
  auto n = nn::init_norm<double>(8);
  auto out = nn::layer_norm(nn::wrap(n, false), ad::constant(x));
  for (int r = 0; r < 3; ++r) {
    double mean = 0, var = 0;
    for (int c = 0; c < 8; ++c) mean += out->value(r, c);
    mean /= 8;
    for (int c = 0; c < 8; ++c)
      var += (out->value(r, c) - mean) * (out->value(r, c) - mean);
    var /= 8;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("adam: converges on a quadratic and is deterministic") {
  auto run = [&] {
    Tensor<double> p = Tensor<double>::from({5.0, -3.0}, 1, 2);
    nn::Adam<double> opt(0.05, 0.9, 0.999);
    for (int i = 0; i < 2000; ++i) {
      auto vp = ad::leaf(p);
      auto target = ad::constant(Tensor<double>::from({1.0, 2.0}, 1, 2));
      auto loss = ad::sum_all(ad::square(ad::sub(vp, target)));
      auto g = ad::grad(loss, {vp})[0];
      opt.step({&p}, {g->value});
    }
    return p;
  };
  auto p1 = run();
  auto p2 = run();
  CHECK(std::abs(p1(0, 0) - 1.0) < 1e-4);
  CHECK(std::abs(p1(0, 1) - 2.0) < 1e-4);
  CHECK(p1(0, 0) == p2(0, 0));
  CHECK(p1(0, 1) == p2(0, 1));
}

TEST_CASE("finite checks flag catches NaN") {
  ad::finite_checks() = true;
  auto a = ad::constant(Tensor<double>::from({1.0, 0.0}, 1, 2));
  CHECK_THROWS_AS(ad::log_v(ad::add_scalar(a, -1.0)), Error);
  ad::finite_checks() = false;
}
