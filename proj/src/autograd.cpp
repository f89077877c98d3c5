#include "dinw/autograd.hpp"

#include <algorithm>
#include <unordered_set>

#include "dinw/kernels.hpp"

namespace dinw::autograd {

namespace {

NodePtr make_node(Tensor value, std::vector<NodePtr> parents) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->parents = std::move(parents);
    node->requires_grad = std::any_of(node->parents.begin(), node->parents.end(),
                                      [](const NodePtr& p) { return p->requires_grad; });
    return node;
}

Tensor scalar_tensor(double v) {
    Tensor t({1, 1, 1, 1});
    t.data()[0] = static_cast<float>(v);
    return t;
}

void add_into(Tensor& into, const Tensor& what) {
    float* a = into.data();
    const float* b = what.data();
    for (std::int64_t i = 0; i < into.size(); ++i) a[i] += b[i];
}

}  // namespace

void Node::accumulate(const Tensor& g) {
    if (!requires_grad) return;
    if (!has_grad) {
        grad = g;
        has_grad = true;
    } else {
        add_into(grad, g);
    }
}

void Node::accumulate(Tensor&& g) {
    if (!requires_grad) return;
    if (!has_grad) {
        grad = std::move(g);
        has_grad = true;
    } else {
        add_into(grad, g);
    }
}

Tensor Value::grad() const {
    if (!node_->requires_grad) {
        throw Error("grad requested for a value that does not track gradients");
    }
    return node_->has_grad ? node_->grad : Tensor::zeros(node_->value.shape());
}

double Value::scalar() const {
    if (!node_->value.is_scalar()) {
        throw ShapeError("scalar() on tensor of shape " + shape_str(node_->value.shape()));
    }
    return static_cast<double>(node_->value.data()[0]);
}

Value leaf(Tensor t, bool requires_grad) {
    auto node = make_node(std::move(t), {});
    node->requires_grad = requires_grad;
    return Value(node);
}

Value conv2d(const Value& x, const Value& w, const Value& b, const ConvSpec& spec) {
    auto node = make_node(ops::conv2d(x.tensor(), w.tensor(), b.tensor(), spec),
                          {x.node(), w.node(), b.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr xn = x.node(), wn = w.node(), bn = b.node();
        node->backprop = [self, xn, wn, bn, spec]() {
            const auto g = kernels::conv_geometry(spec, xn->value.batch(), xn->value.height(),
                                                  xn->value.width());
            const auto& kt = kernels::table();
            if (wn->requires_grad || bn->requires_grad) {
                Tensor dw(wn->value.shape());
                Tensor db(bn->value.shape());
                kt.conv2d_backward_weights(xn->value.data(), self->grad.data(), dw.data(),
                                           db.data(), g);
                wn->accumulate(std::move(dw));
                bn->accumulate(std::move(db));
            }
            if (xn->requires_grad) {
                Tensor dx(xn->value.shape());
                kt.conv2d_backward_input(self->grad.data(), wn->value.data(), dx.data(), g);
                xn->accumulate(std::move(dx));
            }
        };
    }
    return Value(node);
}

Value relu(const Value& x) {
    auto node = make_node(ops::relu(x.tensor()), {x.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr xn = x.node();
        node->backprop = [self, xn]() {
            Tensor dx(xn->value.shape());
            kernels::table().relu_backward(xn->value.data(), self->grad.data(), dx.data(),
                                           dx.size());
            xn->accumulate(std::move(dx));
        };
    }
    return Value(node);
}

Value add(const Value& a, const Value& b) {
    auto node = make_node(ops::add(a.tensor(), b.tensor()), {a.node(), b.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr an = a.node(), bn = b.node();
        node->backprop = [self, an, bn]() {
            an->accumulate(self->grad);
            bn->accumulate(self->grad);
        };
    }
    return Value(node);
}

Value sub(const Value& a, const Value& b) {
    auto node = make_node(ops::sub(a.tensor(), b.tensor()), {a.node(), b.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr an = a.node(), bn = b.node();
        node->backprop = [self, an, bn]() {
            an->accumulate(self->grad);
            if (bn->requires_grad) bn->accumulate(ops::scale(self->grad, -1.0));
        };
    }
    return Value(node);
}

Value mul(const Value& a, const Value& b) {
    auto node = make_node(ops::mul(a.tensor(), b.tensor()), {a.node(), b.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr an = a.node(), bn = b.node();
        node->backprop = [self, an, bn]() {
            if (an->requires_grad) an->accumulate(ops::mul(self->grad, bn->value));
            if (bn->requires_grad) bn->accumulate(ops::mul(self->grad, an->value));
        };
    }
    return Value(node);
}

Value scale(const Value& a, double s) {
    auto node = make_node(ops::scale(a.tensor(), s), {a.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr an = a.node();
        node->backprop = [self, an, s]() { an->accumulate(ops::scale(self->grad, s)); };
    }
    return Value(node);
}

Value sum(const Value& x) {
    auto node = make_node(scalar_tensor(ops::sum(x.tensor())), {x.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr xn = x.node();
        node->backprop = [self, xn]() {
            xn->accumulate(Tensor::full(xn->value.shape(), self->grad.data()[0]));
        };
    }
    return Value(node);
}

Value sum_squares(const Value& x) {
    auto node = make_node(scalar_tensor(ops::sum_squares(x.tensor())), {x.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr xn = x.node();
        node->backprop = [self, xn]() {
            xn->accumulate(ops::scale(xn->value, 2.0 * static_cast<double>(self->grad.data()[0])));
        };
    }
    return Value(node);
}

Value total_variation(const Value& image) {
    auto node = make_node(scalar_tensor(ops::total_variation(image.tensor())), {image.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr in = image.node();
        node->backprop = [self, in]() {
            const Tensor& img = in->value;
            const double u = static_cast<double>(self->grad.data()[0]);
            const std::int64_t h = img.height();
            const std::int64_t w = img.width();
            Tensor dimg(img.shape());
            for (std::int64_t n = 0; n < img.batch(); ++n) {
                const float* p = img.plane(n, 0);
                float* d = dimg.plane(n, 0);
                for (std::int64_t y = 0; y < h; ++y) {
                    for (std::int64_t x = 0; x + 1 < w; ++x) {
                        const std::int64_t i = y * w + x;
                        const double diff =
                            static_cast<double>(p[i + 1]) - static_cast<double>(p[i]);
                        d[i + 1] += static_cast<float>(2.0 * u * diff);
                        d[i] -= static_cast<float>(2.0 * u * diff);
                    }
                }
                for (std::int64_t y = 0; y + 1 < h; ++y) {
                    for (std::int64_t x = 0; x < w; ++x) {
                        const std::int64_t i = y * w + x;
                        const double diff =
                            static_cast<double>(p[i + w]) - static_cast<double>(p[i]);
                        d[i + w] += static_cast<float>(2.0 * u * diff);
                        d[i] -= static_cast<float>(2.0 * u * diff);
                    }
                }
            }
            in->accumulate(std::move(dimg));
        };
    }
    return Value(node);
}

Value weave_rows(const Value& top, const Value& bottom) {
    auto node =
        make_node(ops::weave_rows(top.tensor(), bottom.tensor()), {top.node(), bottom.node()});
    if (node->requires_grad) {
        Node* self = node.get();
        NodePtr tn = top.node(), bn = bottom.node();
        node->backprop = [self, tn, bn]() {
            if (tn->requires_grad) tn->accumulate(ops::take_rows(self->grad, 0));
            if (bn->requires_grad) bn->accumulate(ops::take_rows(self->grad, 1));
        };
    }
    return Value(node);
}

void backward(const Value& loss) {
    if (!loss.tensor().is_scalar()) {
        throw ShapeError("backward: loss must be scalar, got " +
                         shape_str(loss.tensor().shape()));
    }

    // Iterative post-order DFS for the topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (Node* n : order) {
        n->has_grad = false;
        n->grad = Tensor();
    }
    loss.node()->accumulate(scalar_tensor(1.0));

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop && n->has_grad) n->backprop();
    }

    for (Node* n : order) {
        if (n->has_grad) require_finite(n->grad, "backward");
    }
}

}  // namespace dinw::autograd
