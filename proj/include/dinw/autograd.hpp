#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dinw/ops.hpp"
#include "dinw/tensor.hpp"

// Reverse-mode tape over the ops layer, sized for the deinterlacing network:
// conv2d, relu, elementwise arithmetic, reductions, total variation, and row
// weaving. Build a scalar loss out of Values, call backward, then read the
// gradient of every tracked leaf through Value::grad().

namespace dinw::autograd {

class Node {
public:
    Tensor value;
    bool requires_grad = false;
    bool has_grad = false;
    Tensor grad;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backprop;  // pulls this->grad into parents

    void accumulate(const Tensor& g);
    void accumulate(Tensor&& g);  // moves on first touch
};

using NodePtr = std::shared_ptr<Node>;

class Value {
public:
    Value() = default;
    explicit Value(NodePtr node) : node_(std::move(node)) {}

    const Tensor& tensor() const { return node_->value; }
    bool requires_grad() const { return node_ && node_->requires_grad; }

    // Gradient of the last backward() pass; zeros if the sweep never reached
    // this node.
    Tensor grad() const;

    double scalar() const;

    const NodePtr& node() const { return node_; }

private:
    NodePtr node_;
};

Value leaf(Tensor t, bool requires_grad = false);

Value conv2d(const Value& x, const Value& w, const Value& b, const ConvSpec& spec);
Value relu(const Value& x);
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value scale(const Value& a, double s);
Value sum(const Value& x);
Value sum_squares(const Value& x);
Value total_variation(const Value& image);
Value weave_rows(const Value& top, const Value& bottom);

// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse topological order.
// loss must be scalar.
void backward(const Value& loss);

}  // namespace dinw::autograd
