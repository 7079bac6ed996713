#pragma once

// Minimal reverse-mode differentiation over dense float64 tensors.
//
// A Graph is a tape: every operation appends a node whose inputs were created
// earlier, so creation order is a topological order and backward() walks the
// tape once in reverse. Parameters live outside the graph; a parameter node
// reads the parameter's value in place and accumulates into its gradient, so
// gradients of several graphs (one per sample of a mini-batch) add up.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace loadcast::ad {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor vector(std::vector<double> v);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double& operator[](std::size_t i) { return data_[i]; }
    const double& operator[](std::size_t i) const { return data_[i]; }

    /// Value of a single-element tensor.
    double item() const;

    void fill(double v);
    Tensor reshaped(Shape shape) const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// A trainable tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v);
    void zero_grad() { grad.fill(0.0); }
};

class Graph;

/// Handle to a node of a Graph.
class Var {
public:
    Var() = default;
    Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

    Graph& graph() const { return *graph_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return graph_ != nullptr; }

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t size() const { return value().size(); }
    double item() const { return value().item(); }

    /// Gradient after Graph::backward. Zero tensor when the node was not reached.
    Tensor grad() const;

private:
    Graph* graph_ = nullptr;
    std::size_t id_ = 0;
};

class Graph {
public:
    using BackwardFn = std::function<void(Graph&, std::size_t self)>;

    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    Var constant(Tensor value);
    Var constant(double value) { return constant(Tensor::scalar(value)); }
    /// A leaf that requires a gradient but is owned by the graph.
    Var variable(Tensor value);
    /// A leaf reading the parameter in place; gradients accumulate into p.grad.
    Var parameter(Parameter& p);
    /// A read-only view of a parameter that takes no gradient (inference).
    Var parameter(const Parameter& p);

    /// Runs the backward pass from a single-element node seeded with 1.
    void backward(Var root);

    std::size_t size() const noexcept { return nodes_.size(); }

    // Interface used by operation implementations.
    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
    const Tensor& value(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    /// Gradient buffer of a node, allocated as zeros on first access.
    Tensor& grad(std::size_t id);
    bool has_grad(std::size_t id) const;
    const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };

    std::vector<Node> nodes_;
};

// Element-wise arithmetic on equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var add_scalar(Var a, double c);
Var mul_scalar(Var a, double c);
/// Multiplies every element of `a` by the single-element node `s`.
Var scale_by(Var a, Var s);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator+(Var a, double c) { return add_scalar(a, c); }
inline Var operator*(Var a, double c) { return mul_scalar(a, c); }
inline Var operator*(double c, Var a) { return mul_scalar(a, c); }

Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
/// max(a, floor); the gradient is zero where the floor is active.
Var clamp_min(Var a, double floor);
Var sum(Var a);

Var leaky_relu(Var a, double slope);
Var softplus(Var a);
/// Smooth squashing of the reals into (lower, upper).
Var softrange(Var a, double lower, double upper);

/// y = W x + b with x [n_in], W [n_out, n_in], b [n_out].
Var dense(Var x, Var weights, Var bias);

/// Same-padded cross-correlation: x [c_in, L], kernels [c_out, c_in, k] with
/// odd k, bias [c_out] -> [c_out, L].
Var conv1d(Var x, Var kernels, Var bias);

/// Valid-window max pooling along the last axis of x [c, L] ->
/// [c, (L - pool) / stride + 1]. Gradients route to the first maximum.
Var maxpool1d(Var x, std::size_t pool, std::size_t stride);

Var reshape(Var a, Shape shape);
Var flatten(Var a);
/// Concatenation of the flattened inputs.
Var concat(std::initializer_list<Var> parts);
Var concat(std::span<const Var> parts);
/// Elements [begin, end) of the flattened input.
Var slice(Var a, std::size_t begin, std::size_t end);

// Scalar helpers shared by the operations and by test oracles.
double softplus(double x);
double sigmoid(double x);
double softrange(double x, double lower, double upper);
std::size_t pooled_length(std::size_t length, std::size_t pool, std::size_t stride);

}  // namespace loadcast::ad
