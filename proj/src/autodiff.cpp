#include "ftlgan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ftlgan/error.hpp"
#include "ftlgan/kernels.hpp"

namespace ftlgan::ad {

namespace {

// Creates a node; inputs and the backward closure are only retained when some
// input needs a gradient.
Var make(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.requires_grad()) n->requires_grad = true;
  }
  if (n->requires_grad) {
    n->inputs.reserve(inputs.size());
    for (auto& in : inputs) n->inputs.push_back(in.node());
    n->backward = std::move(bw);
  }
  return Var(std::move(n));
}

bool wants(const std::shared_ptr<Node>& n) { return n && n->requires_grad; }

}  // namespace

Var Var::constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::leaf(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

void accumulate(Node& node, const Tensor& g) {
  if (!node.requires_grad) return;
  if (node.grad.empty()) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void backward(const Var& root, const Tensor& seed) {
  if (!root.requires_grad()) return;
  require_same_shape(root.value(), seed, "backward seed");

  // Iterative post-order DFS gives a topological order (inputs before consumers).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  accumulate(*root.node(), seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) {
      n->backward(*n);
      n->grad = Tensor();
    }
  }
}

void backward(const Var& root) {
  if (root.value().size() != 1) throw InvalidArgument("backward() without seed needs a scalar root");
  backward(root, Tensor(root.value().shape(), 1.0));
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int pad) {
  static const Tensor kNoBias;
  const Tensor& b = bias.defined() ? bias.value() : kNoBias;
  Tensor out = kernels::conv2d(x.value(), weight.value(), b, pad);
  std::vector<Var> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make(std::move(out), std::move(inputs), [pad](Node& n) {
    auto& in = n.inputs[0];
    auto& w = n.inputs[1];
    Tensor gi, gw, gb;
    const bool has_bias = n.inputs.size() > 2;
    kernels::conv2d_backward(in->value, w->value, pad, n.grad, wants(in) ? &gi : nullptr,
                             wants(w) ? &gw : nullptr, has_bias && wants(n.inputs[2]) ? &gb : nullptr);
    if (wants(in)) accumulate(*in, gi);
    if (wants(w)) accumulate(*w, gw);
    if (has_bias && wants(n.inputs[2])) accumulate(*n.inputs[2], gb);
  });
}

Var leaky_relu(const Var& x, double slope) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v >= 0.0 ? v : slope * v;
  return make(std::move(out), {x}, [slope](Node& n) {
    Tensor g = n.grad;
    const Tensor& in = n.inputs[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in[i] < 0.0) g[i] *= slope;
    }
    accumulate(*n.inputs[0], g);
  });
}

Var sin(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::sin(v);
  return make(std::move(out), {x}, [](Node& n) {
    Tensor g = n.grad;
    const Tensor& in = n.inputs[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= std::cos(in[i]);
    accumulate(*n.inputs[0], g);
  });
}

Var add(const Var& a, const Var& b) { return add_scaled(a, b, 1.0); }

Var add_scaled(const Var& a, const Var& b, double s) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * bv[i];
  return make(std::move(out), {a, b}, [s](Node& n) {
    if (wants(n.inputs[0])) accumulate(*n.inputs[0], n.grad);
    if (wants(n.inputs[1])) {
      Tensor g = n.grad;
      g *= s;
      accumulate(*n.inputs[1], g);
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  out *= s;
  return make(std::move(out), {a}, [s](Node& n) {
    Tensor g = n.grad;
    g *= s;
    accumulate(*n.inputs[0], g);
  });
}

Var concat_channels(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat of nothing");
  const int h = parts[0].value().dim(1), w = parts[0].value().dim(2);
  int channels = 0;
  for (const auto& p : parts) {
    if (p.value().rank() != 3 || p.value().dim(1) != h || p.value().dim(2) != w) {
      throw InvalidArgument("concat_channels: spatial mismatch");
    }
    channels += p.value().dim(0);
  }
  Tensor out({channels, h, w});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + offset);
    offset += p.value().size();
  }
  return make(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [](Node& n) {
    std::size_t off = 0;
    for (auto& in : n.inputs) {
      const std::size_t len = in->value.size();
      if (wants(in)) {
        Tensor g(in->value.shape());
        std::copy(n.grad.data() + off, n.grad.data() + off + len, g.data());
        accumulate(*in, g);
      }
      off += len;
    }
  });
}

Var pixel_shuffle(const Var& x, int s) {
  return make(kernels::pixel_shuffle(x.value(), s), {x},
              [s](Node& n) { accumulate(*n.inputs[0], kernels::pixel_unshuffle(n.grad, s)); });
}

Var zero_insert(const Var& x, int s) {
  return make(kernels::zero_insert(x.value(), s), {x},
              [s](Node& n) { accumulate(*n.inputs[0], kernels::zero_insert_adjoint(n.grad, s)); });
}

Var avg_pool(const Var& x, int k) {
  return make(kernels::avg_pool(x.value(), k), {x},
              [k](Node& n) { accumulate(*n.inputs[0], kernels::avg_pool_adjoint(n.grad, k)); });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  const Tensor& w = weight.value();
  const Tensor& xv = x.value();
  if (w.rank() != 2 || static_cast<std::size_t>(w.dim(1)) != xv.size()) {
    throw InvalidArgument("linear: weight " + w.shape_string() + " incompatible with input " + xv.shape_string());
  }
  const int out_n = w.dim(0), in_n = w.dim(1);
  Tensor out({out_n});
  for (int o = 0; o < out_n; ++o) {
    const double* row = w.data() + static_cast<std::size_t>(o) * in_n;
    double acc = bias.defined() ? bias.value()[static_cast<std::size_t>(o)] : 0.0;
    for (int i = 0; i < in_n; ++i) acc += row[i] * xv[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(o)] = acc;
  }
  std::vector<Var> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make(std::move(out), std::move(inputs), [out_n, in_n](Node& n) {
    auto& in = n.inputs[0];
    auto& wn = n.inputs[1];
    if (wants(in)) {
      Tensor g(in->value.shape());
      for (int o = 0; o < out_n; ++o) {
        const double go = n.grad[static_cast<std::size_t>(o)];
        const double* row = wn->value.data() + static_cast<std::size_t>(o) * in_n;
        for (int i = 0; i < in_n; ++i) g[static_cast<std::size_t>(i)] += go * row[i];
      }
      accumulate(*in, g);
    }
    if (wants(wn)) {
      Tensor g(wn->value.shape());
      for (int o = 0; o < out_n; ++o) {
        const double go = n.grad[static_cast<std::size_t>(o)];
        double* row = g.data() + static_cast<std::size_t>(o) * in_n;
        for (int i = 0; i < in_n; ++i) row[i] = go * in->value[static_cast<std::size_t>(i)];
      }
      accumulate(*wn, g);
    }
    if (n.inputs.size() > 2 && wants(n.inputs[2])) accumulate(*n.inputs[2], n.grad);
  });
}

Var l2_normalize(const Var& x, double alpha) {
  const double norm = std::sqrt(x.value().squared_norm());
  if (!(norm > 0.0)) throw DegenerateInput("cannot normalize a zero vector");
  Tensor out = x.value();
  out *= alpha / norm;
  return make(std::move(out), {x}, [alpha, norm](Node& n) {
    // d(alpha x/|x|) = alpha/|x| (g - u (u.g)), u = x/|x|
    const Tensor& xv = n.inputs[0]->value;
    double dot = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) dot += xv[i] * n.grad[i];
    dot /= norm;
    Tensor g(xv.shape());
    for (std::size_t i = 0; i < xv.size(); ++i) g[i] = alpha / norm * (n.grad[i] - xv[i] / norm * dot);
    accumulate(*n.inputs[0], g);
  });
}

Var resize(const Var& x, int out_h, int out_w, const ResampleMethod& method) {
  const int in_h = x.value().dim(1), in_w = x.value().dim(2);
  return make(resize_planes(x.value(), out_h, out_w, method), {x}, [in_h, in_w, method](Node& n) {
    accumulate(*n.inputs[0], resize_planes_adjoint(n.grad, in_h, in_w, method));
  });
}

Var scalar_function(std::vector<Var> inputs, double value, std::vector<Tensor> partials) {
  if (partials.size() != inputs.size()) throw InvalidArgument("scalar_function: one partial per input required");
  for (std::size_t i = 0; i < inputs.size(); ++i) require_same_shape(inputs[i].value(), partials[i], "scalar_function");
  return make(Tensor({1}, value), std::move(inputs), [p = std::move(partials)](Node& n) {
    const double g = n.grad[0];
    for (std::size_t i = 0; i < n.inputs.size(); ++i) {
      if (!wants(n.inputs[i])) continue;
      Tensor t = p[i];
      t *= g;
      accumulate(*n.inputs[i], t);
    }
  });
}

}  // namespace ftlgan::ad
