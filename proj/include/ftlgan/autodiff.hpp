#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ftlgan/tensor.hpp"
#include "ftlgan/upsamplers.hpp"

// Minimal reverse-mode differentiation over Tensor-valued nodes.
//
// A graph is built implicitly by calling the ops below; `backward` then walks it in
// reverse topological order. Nodes whose inputs need no gradient keep no references
// to those inputs, so inference-only graphs free activations as they go.
namespace ftlgan::ad {

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Var constant(Tensor value);
  /// Leaf whose gradient is accumulated by backward().
  static Var leaf(Tensor value);

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  /// Accumulated gradient; empty when nothing flowed into this node.
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Propagates `seed` (same shape as root) back through the graph.
void backward(const Var& root, const Tensor& seed);
/// For scalar roots; seeds with 1.
void backward(const Var& root);

/// Adds g into the node's gradient buffer (allocating on first use).
void accumulate(Node& node, const Tensor& g);

// -- ops ---------------------------------------------------------------------

Var conv2d(const Var& x, const Var& weight, const Var& bias, int pad);
Var leaky_relu(const Var& x, double slope);
Var sin(const Var& x);
Var add(const Var& a, const Var& b);
/// a + s * b
Var add_scaled(const Var& a, const Var& b, double s);
Var scale(const Var& a, double s);
Var concat_channels(std::span<const Var> parts);
Var pixel_shuffle(const Var& x, int s);
Var zero_insert(const Var& x, int s);
Var avg_pool(const Var& x, int k);
/// Flattens x and applies weight (O, N) plus bias (O); output shape (O).
Var linear(const Var& x, const Var& weight, const Var& bias);
/// alpha * x / ||x||_2, treating x as one flat vector. Throws DegenerateInput on zero norm.
Var l2_normalize(const Var& x, double alpha = 1.0);
Var resize(const Var& x, int out_h, int out_w, const ResampleMethod& method);

/// Scalar node with externally computed value and partial derivatives
/// d value / d inputs[i] = partials[i]. Used to splice closed-form losses into a graph.
Var scalar_function(std::vector<Var> inputs, double value, std::vector<Tensor> partials);

}  // namespace ftlgan::ad
