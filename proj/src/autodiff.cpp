#include "loadcast/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "loadcast/error.hpp"

namespace loadcast::ad {

namespace {

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                         " differ");
}

void require_same_graph(const Var& a, const Var& b) {
    if (&a.graph() != &b.graph()) throw ShapeError("operands belong to different graphs");
}

// Element-wise unary op: value f(x), derivative df(x, y).
template <typename F, typename DF>
Var unary(Var a, F f, DF df) {
    Graph& g = a.graph();
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    const std::size_t ia = a.id();
    return g.record(std::move(y), {ia}, [ia, df](Graph& g, std::size_t self) {
        if (!g.requires_grad(ia)) return;
        const Tensor& x = g.value(ia);
        const Tensor& y = g.value(self);
        const Tensor& gy = g.grad(self);
        Tensor& gx = g.grad(ia);
        for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * df(x[i], y[i]);
    });
}

}  // namespace

std::string to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_))
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         to_string(shape_));
}

Tensor Tensor::vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
}

double Tensor::item() const {
    if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape_));
    return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size())
        throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    return Tensor(std::move(shape), data_);
}

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

// ---------------------------------------------------------------------------
// Var / Graph

const Tensor& Var::value() const { return graph_->value(id_); }

Tensor Var::grad() const {
    if (graph_->has_grad(id_)) return graph_->grad(id_);
    return Tensor(value().shape());
}

Var Graph::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, false});
    return {this, nodes_.size() - 1};
}

Var Graph::variable(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, true});
    return {this, nodes_.size() - 1};
}

Var Graph::parameter(Parameter& p) {
    if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
    nodes_.push_back(Node{{}, {}, {}, {}, &p, true});
    return {this, nodes_.size() - 1};
}

Var Graph::parameter(const Parameter& p) {
    // Never written through: the node does not require a gradient.
    nodes_.push_back(Node{{}, {}, {}, {}, const_cast<Parameter*>(&p), false});
    return {this, nodes_.size() - 1};
}

Var Graph::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    bool needs = false;
    for (auto i : inputs) needs = needs || nodes_.at(i).requires_grad;
    nodes_.push_back(Node{std::move(value), {}, std::move(inputs), needs ? std::move(backward) : BackwardFn{},
                          nullptr, needs});
    return {this, nodes_.size() - 1};
}

const Tensor& Graph::value(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return n.param ? n.param->value : n.value;
}

Tensor& Graph::grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.param) return n.param->grad;
    if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
    return n.grad;
}

bool Graph::has_grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return (n.param != nullptr && n.requires_grad) || !n.grad.empty();
}

void Graph::backward(Var root) {
    if (&root.graph() != this) throw ShapeError("backward root belongs to another graph");
    if (root.size() != 1) throw ShapeError("backward root must hold a single element, got " + to_string(root.shape()));
    for (std::size_t i = 0; i <= root.id(); ++i)
        if (!nodes_[i].param) nodes_[i].grad = Tensor();
    if (!nodes_[root.id()].requires_grad) return;
    grad(root.id())[0] += 1.0;
    for (std::size_t i = root.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backward && !n.grad.empty()) n.backward(*this, i);
    }
}

// ---------------------------------------------------------------------------
// Scalar helpers

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softrange(double x, double lower, double upper) {
    if (!(upper > lower)) throw DomainError("diff-engine", "softrange requires upper > lower");
    const double width = upper - lower;
    const double inner = width - softplus(upper - x);
    const double y = lower + width / softplus(width) * softplus(inner);
    // Keep the result strictly inside the open interval once it saturates in float64.
    return std::clamp(y, std::nextafter(lower, upper), std::nextafter(upper, lower));
}

std::size_t pooled_length(std::size_t length, std::size_t pool, std::size_t stride) {
    if (pool == 0 || stride == 0) throw ShapeError("maxpool1d: pool and stride must be >= 1");
    if (length < pool)
        throw ShapeError("maxpool1d: length " + std::to_string(length) + " shorter than pool " + std::to_string(pool));
    return (length - pool) / stride + 1;
}

// ---------------------------------------------------------------------------
// Element-wise arithmetic

Var add(Var a, Var b) {
    require_same_graph(a, b);
    require_same_shape(a, b, "add");
    Tensor y(a.shape());
    const Tensor &x0 = a.value(), &x1 = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x0[i] + x1[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(y), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        for (auto in : {ia, ib}) {
            if (!g.requires_grad(in)) continue;
            Tensor& gx = g.grad(in);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
        }
    });
}

Var sub(Var a, Var b) {
    require_same_graph(a, b);
    require_same_shape(a, b, "sub");
    Tensor y(a.shape());
    const Tensor &x0 = a.value(), &x1 = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x0[i] - x1[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(y), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        if (g.requires_grad(ia)) {
            Tensor& gx = g.grad(ia);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
        }
        if (g.requires_grad(ib)) {
            Tensor& gx = g.grad(ib);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] -= gy[i];
        }
    });
}

Var mul(Var a, Var b) {
    require_same_graph(a, b);
    require_same_shape(a, b, "mul");
    Tensor y(a.shape());
    const Tensor &x0 = a.value(), &x1 = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x0[i] * x1[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(y), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        const Tensor &x0 = g.value(ia), &x1 = g.value(ib);
        if (g.requires_grad(ia)) {
            Tensor& gx = g.grad(ia);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * x1[i];
        }
        if (g.requires_grad(ib)) {
            Tensor& gx = g.grad(ib);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * x0[i];
        }
    });
}

Var div(Var a, Var b) {
    require_same_graph(a, b);
    require_same_shape(a, b, "div");
    Tensor y(a.shape());
    const Tensor &x0 = a.value(), &x1 = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x0[i] / x1[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(y), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        const Tensor& x1 = g.value(ib);
        const Tensor& y = g.value(self);
        if (g.requires_grad(ia)) {
            Tensor& gx = g.grad(ia);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] / x1[i];
        }
        if (g.requires_grad(ib)) {
            Tensor& gx = g.grad(ib);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] -= gy[i] * y[i] / x1[i];
        }
    });
}

Var neg(Var a) {
    return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var add_scalar(Var a, double c) {
    return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var mul_scalar(Var a, double c) {
    return unary(a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}

Var scale_by(Var a, Var s) {
    require_same_graph(a, s);
    if (s.size() != 1) throw ShapeError("scale_by: scale must hold one element, got " + to_string(s.shape()));
    const double k = s.item();
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * k;
    const std::size_t ia = a.id(), is = s.id();
    return a.graph().record(std::move(y), {ia, is}, [ia, is](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        const Tensor& x = g.value(ia);
        const double k = g.value(is)[0];
        if (g.requires_grad(ia)) {
            Tensor& gx = g.grad(ia);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * k;
        }
        if (g.requires_grad(is)) {
            double acc = 0.0;
            for (std::size_t i = 0; i < gy.size(); ++i) acc += gy[i] * x[i];
            g.grad(is)[0] += acc;
        }
    });
}

Var exp(Var a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
    return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
    return unary(a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Var clamp_min(Var a, double floor) {
    return unary(
        a, [floor](double x) { return std::max(x, floor); },
        [floor](double x, double) { return x > floor ? 1.0 : 0.0; });
}

Var sum(Var a) {
    const Tensor& x = a.value();
    double s = 0.0;
    for (double v : x.data()) s += v;
    const std::size_t ia = a.id();
    return a.graph().record(Tensor::scalar(s), {ia}, [ia](Graph& g, std::size_t self) {
        const double gy = g.grad(self)[0];
        Tensor& gx = g.grad(ia);
        for (double& v : gx.data()) v += gy;
    });
}

// ---------------------------------------------------------------------------
// Activations

Var leaky_relu(Var a, double slope) {
    return unary(
        a, [slope](double x) { return x > 0.0 ? x : slope * x; },
        [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var softplus(Var a) {
    return unary(a, [](double x) { return softplus(x); }, [](double x, double) { return sigmoid(x); });
}

Var softrange(Var a, double lower, double upper) {
    if (!(upper > lower))
        throw DomainError("diff-engine", "softrange requires upper > lower, got [" + std::to_string(lower) + ", " +
                                             std::to_string(upper) + "]");
    const double width = upper - lower;
    const double gain = width / softplus(width);
    return unary(
        a, [lower, upper](double x) { return softrange(x, lower, upper); },
        [upper, width, gain](double x, double) {
            const double inner = width - softplus(upper - x);
            return gain * sigmoid(inner) * sigmoid(upper - x);
        });
}

// ---------------------------------------------------------------------------
// Layers

Var dense(Var x, Var weights, Var bias) {
    require_same_graph(x, weights);
    require_same_graph(x, bias);
    const Tensor &xv = x.value(), &w = weights.value(), &b = bias.value();
    if (xv.rank() != 1 || w.rank() != 2 || b.rank() != 1 || w.dim(1) != xv.dim(0) || w.dim(0) != b.dim(0))
        throw ShapeError("dense: input " + to_string(xv.shape()) + ", weights " + to_string(w.shape()) + ", bias " +
                         to_string(b.shape()));
    const std::size_t n_out = w.dim(0), n_in = w.dim(1);
    Tensor y({n_out});
    for (std::size_t o = 0; o < n_out; ++o) {
        const double* row = &w[o * n_in];
        double acc = b[o];
        for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * xv[i];
        y[o] = acc;
    }
    const std::size_t ix = x.id(), iw = weights.id(), ib = bias.id();
    return x.graph().record(std::move(y), {ix, iw, ib}, [ix, iw, ib, n_in, n_out](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        const Tensor& xv = g.value(ix);
        const Tensor& w = g.value(iw);
        if (g.requires_grad(ix)) {
            Tensor& gx = g.grad(ix);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = gy[o];
                if (d == 0.0) continue;
                const double* row = &w[o * n_in];
                for (std::size_t i = 0; i < n_in; ++i) gx[i] += d * row[i];
            }
        }
        if (g.requires_grad(iw)) {
            Tensor& gw = g.grad(iw);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = gy[o];
                if (d == 0.0) continue;
                double* row = &gw[o * n_in];
                for (std::size_t i = 0; i < n_in; ++i) row[i] += d * xv[i];
            }
        }
        if (g.requires_grad(ib)) {
            Tensor& gb = g.grad(ib);
            for (std::size_t o = 0; o < n_out; ++o) gb[o] += gy[o];
        }
    });
}

Var conv1d(Var x, Var kernels, Var bias) {
    require_same_graph(x, kernels);
    require_same_graph(x, bias);
    const Tensor &xv = x.value(), &k = kernels.value(), &b = bias.value();
    if (xv.rank() != 2 || k.rank() != 3 || b.rank() != 1 || k.dim(1) != xv.dim(0) || k.dim(0) != b.dim(0))
        throw ShapeError("conv1d: input " + to_string(xv.shape()) + ", kernels " + to_string(k.shape()) + ", bias " +
                         to_string(b.shape()));
    const std::size_t c_in = xv.dim(0), len = xv.dim(1), c_out = k.dim(0), width = k.dim(2);
    if (width % 2 == 0) throw ShapeError("conv1d: same padding needs an odd filter size, got " + std::to_string(width));
    if (len < width)
        throw ShapeError("conv1d: length " + std::to_string(len) + " shorter than filter size " + std::to_string(width));
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(width / 2);
    const auto L = static_cast<std::ptrdiff_t>(len);

    // Visits every (output, input, tap) triple whose input index lies inside
    // the signal; zero padding contributes nothing.
    auto for_each_tap = [=](auto&& fn) {
        for (std::size_t o = 0; o < c_out; ++o)
            for (std::size_t c = 0; c < c_in; ++c)
                for (std::size_t j = 0; j < width; ++j) {
                    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
                    const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
                    const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(L, L - shift);
                    fn(o, c, j, shift, t0, t1);
                }
    };

    Tensor y({c_out, len});
    for (std::size_t o = 0; o < c_out; ++o)
        for (std::size_t t = 0; t < len; ++t) y[o * len + t] = b[o];
    for_each_tap([&](std::size_t o, std::size_t c, std::size_t j, std::ptrdiff_t shift, std::ptrdiff_t t0,
                     std::ptrdiff_t t1) {
        const double kv = k[(o * c_in + c) * width + j];
        double* yo = &y[o * len];
        const double* xc = &xv[c * len];
        for (std::ptrdiff_t t = t0; t < t1; ++t) yo[t] += kv * xc[t + shift];
    });

    const std::size_t ix = x.id(), ik = kernels.id(), ib = bias.id();
    return x.graph().record(
        std::move(y), {ix, ik, ib}, [ix, ik, ib, c_in, c_out, len, width, for_each_tap](Graph& g, std::size_t self) {
            const Tensor& gy = g.grad(self);
            const Tensor& xv = g.value(ix);
            const Tensor& k = g.value(ik);
            const bool need_x = g.requires_grad(ix), need_k = g.requires_grad(ik);
            Tensor* gx = need_x ? &g.grad(ix) : nullptr;
            Tensor* gk = need_k ? &g.grad(ik) : nullptr;
            for_each_tap([&](std::size_t o, std::size_t c, std::size_t j, std::ptrdiff_t shift, std::ptrdiff_t t0,
                             std::ptrdiff_t t1) {
                const double* gyo = &gy[o * len];
                const std::size_t kidx = (o * c_in + c) * width + j;
                if (gx) {
                    const double kv = k[kidx];
                    double* gxc = &(*gx)[c * len];
                    for (std::ptrdiff_t t = t0; t < t1; ++t) gxc[t + shift] += kv * gyo[t];
                }
                if (gk) {
                    const double* xc = &xv[c * len];
                    double acc = 0.0;
                    for (std::ptrdiff_t t = t0; t < t1; ++t) acc += gyo[t] * xc[t + shift];
                    (*gk)[kidx] += acc;
                }
            });
            if (g.requires_grad(ib)) {
                Tensor& gb = g.grad(ib);
                for (std::size_t o = 0; o < c_out; ++o)
                    for (std::size_t t = 0; t < len; ++t) gb[o] += gy[o * len + t];
            }
        });
}

Var maxpool1d(Var x, std::size_t pool, std::size_t stride) {
    const Tensor& xv = x.value();
    if (xv.rank() != 2) throw ShapeError("maxpool1d: expected [channels, length], got " + to_string(xv.shape()));
    const std::size_t channels = xv.dim(0), len = xv.dim(1);
    const std::size_t out_len = pooled_length(len, pool, stride);
    Tensor y({channels, out_len});
    std::vector<std::size_t> argmax(channels * out_len);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < out_len; ++t) {
            std::size_t best = c * len + t * stride;
            for (std::size_t j = 1; j < pool; ++j) {
                const std::size_t idx = c * len + t * stride + j;
                if (xv[idx] > xv[best]) best = idx;
            }
            y[c * out_len + t] = xv[best];
            argmax[c * out_len + t] = best;
        }
    const std::size_t ix = x.id();
    return x.graph().record(std::move(y), {ix}, [ix, argmax = std::move(argmax)](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        Tensor& gx = g.grad(ix);
        for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += gy[i];
    });
}

// ---------------------------------------------------------------------------
// Shape manipulation

Var reshape(Var a, Shape shape) {
    Tensor y = a.value().reshaped(std::move(shape));
    const std::size_t ia = a.id();
    return a.graph().record(std::move(y), {ia}, [ia](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        Tensor& gx = g.grad(ia);
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
    });
}

Var flatten(Var a) { return reshape(a, {a.size()}); }

Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat of zero tensors");
    Graph& graph = parts.front().graph();
    std::vector<double> data;
    std::vector<std::size_t> ids;
    for (const Var& p : parts) {
        if (&p.graph() != &graph) throw ShapeError("concat operands belong to different graphs");
        const auto v = p.value().data();
        data.insert(data.end(), v.begin(), v.end());
        ids.push_back(p.id());
    }
    auto inputs = ids;
    return graph.record(Tensor::vector(std::move(data)), std::move(inputs), [ids](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        std::size_t offset = 0;
        for (auto id : ids) {
            const std::size_t n = g.value(id).size();
            if (g.requires_grad(id)) {
                Tensor& gx = g.grad(id);
                for (std::size_t i = 0; i < n; ++i) gx[i] += gy[offset + i];
            }
            offset += n;
        }
    });
}

Var slice(Var a, std::size_t begin, std::size_t end) {
    const Tensor& x = a.value();
    if (begin > end || end > x.size())
        throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
                         to_string(x.shape()));
    std::vector<double> data(x.data().begin() + static_cast<std::ptrdiff_t>(begin),
                             x.data().begin() + static_cast<std::ptrdiff_t>(end));
    const std::size_t ia = a.id();
    return a.graph().record(Tensor::vector(std::move(data)), {ia}, [ia, begin](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        Tensor& gx = g.grad(ia);
        for (std::size_t i = 0; i < gy.size(); ++i) gx[begin + i] += gy[i];
    });
}

}  // namespace loadcast::ad
