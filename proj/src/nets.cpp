#include "loadcast/nets.hpp"

#include <cmath>
#include <string>

#include "loadcast/error.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

ad::Tensor uniform_tensor(ad::Shape shape, double bound, Rng& rng) {
    ad::Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.data()) v = dist(rng);
    return t;
}

ad::Parameter conv_kernel(std::string name, std::size_t c_out, std::size_t c_in, std::size_t k, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(c_in * k));
    return {std::move(name), uniform_tensor({c_out, c_in, k}, bound, rng)};
}

ad::Parameter zeros(std::string name, ad::Shape shape) { return {std::move(name), ad::Tensor(std::move(shape))}; }

void check_finite(const ad::Var& v, const char* what) {
    for (double x : v.value().data())
        if (!std::isfinite(x)) throw DivergenceError("forecast-nets", std::string("non-finite activation in ") + what);
}

}  // namespace

ad::Var lognormal_nll(ad::Var mu, ad::Var sigma, std::span<const double> y) {
    if (mu.size() != y.size() || sigma.size() != y.size())
        throw ShapeError("lognormal_nll: " + std::to_string(y.size()) + " targets for " + std::to_string(mu.size()) +
                         " distributions");
    std::vector<double> log_y(y.size());
    double constant = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw DomainError("forecast-nets", "non-positive training target " + std::to_string(y[i]));
        log_y[i] = std::log(y[i]);
        constant += log_y[i] + kLogSqrtTwoPi;
    }
    ad::Graph& g = mu.graph();
    const ad::Var ly = g.constant(ad::Tensor(mu.shape(), std::move(log_y)));
    const ad::Var d = ly - mu;
    const ad::Var quad = (d * d) / ((sigma * sigma) * 2.0);
    return ad::sum(ad::log(sigma) + quad) + constant;
}

// ---------------------------------------------------------------------------
// Branch A

BranchA::BranchA(BranchAConfig config, std::uint64_t seed) : config_(config) {
    config_.initial_decay.validate();
    if (config_.hidden_width == 0) throw DomainError("forecast-nets", "hidden width must be positive");
    if (!(config_.sigma_max > 0.0)) throw DomainError("forecast-nets", "sigma_max must be positive");
    Rng rng = make_rng(seed, {hash_key("branch-a")});
    std::size_t fan_in = BranchAInput::kSize;
    for (std::size_t l = 0; l <= config_.hidden_layers; ++l) {
        const bool head = l == config_.hidden_layers;
        const std::size_t fan_out = head ? 2 : config_.hidden_width;
        const std::string id = std::to_string(l);
        if (head && config_.zero_init_head) {
            layers_.push_back(zeros("a.dense" + id + ".w", {fan_out, fan_in}));
        } else {
            layers_.emplace_back("a.dense" + id + ".w",
                                 uniform_tensor({fan_out, fan_in}, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng));
        }
        layers_.push_back(zeros("a.dense" + id + ".b", {fan_out}));
        fan_in = fan_out;
    }
    lambda_mu_ = ad::Parameter("a.lambda_mu", ad::Tensor::scalar(config_.initial_decay.lambda_mu));
    lambda_sigma_ = ad::Parameter("a.lambda_sigma", ad::Tensor::scalar(config_.initial_decay.lambda_sigma));
}

template <typename Self>
DistributionVars BranchA::forward_impl(Self& self, ad::Graph& g, const SampleWindow& w) {
    ad::Var h = g.constant(ad::Tensor::vector(w.branch_a.flatten()));
    const std::size_t n_layers = self.layers_.size() / 2;
    for (std::size_t l = 0; l < n_layers; ++l) {
        h = ad::dense(h, g.parameter(self.layers_[2 * l]), g.parameter(self.layers_[2 * l + 1]));
        if (l + 1 < n_layers) h = ad::leaky_relu(h, self.config_.slope);
    }
    check_finite(h, "branch A head");

    const auto lags = history_lags();
    const auto prior = estimate_weighted(g, w.history_totals, lags, g.parameter(self.lambda_mu_),
                                         g.parameter(self.lambda_sigma_));
    const ad::Var mu = prior.mu + ad::slice(h, 0, 1);
    const ad::Var sigma = ad::softrange(prior.sigma + ad::slice(h, 1, 2), 0.0, self.config_.sigma_max);
    return {mu, sigma};
}

DistributionVars BranchA::forward(ad::Graph& g, const SampleWindow& w) { return forward_impl(*this, g, w); }

DistributionVars BranchA::forward(ad::Graph& g, const SampleWindow& w) const { return forward_impl(*this, g, w); }

ad::Var BranchA::loss(ad::Graph& g, const SampleWindow& w) {
    const auto out = forward(g, w);
    return lognormal_nll(out.mu, out.sigma, std::span<const double>(&w.daily_target, 1));
}

ad::Var BranchA::loss(ad::Graph& g, const SampleWindow& w) const {
    const auto out = forward(g, w);
    return lognormal_nll(out.mu, out.sigma, std::span<const double>(&w.daily_target, 1));
}

LognormalParams BranchA::predict(const SampleWindow& w) const {
    ad::Graph g;
    const auto out = forward(g, w);
    return {out.mu.item(), out.sigma.item()};
}

DecayParams BranchA::decay() const { return {lambda_mu_.value[0], lambda_sigma_.value[0]}; }

void BranchA::project_constraints() {
    lambda_mu_.value[0] = std::max(lambda_mu_.value[0], 0.0);
    lambda_sigma_.value[0] = std::max(lambda_sigma_.value[0], 0.0);
}

std::vector<ad::Parameter*> BranchA::parameters() {
    std::vector<ad::Parameter*> out;
    for (auto& p : layers_) out.push_back(&p);
    out.push_back(&lambda_mu_);
    out.push_back(&lambda_sigma_);
    return out;
}

std::vector<const ad::Parameter*> BranchA::parameters() const {
    std::vector<const ad::Parameter*> out;
    for (const auto& p : layers_) out.push_back(&p);
    out.push_back(&lambda_mu_);
    out.push_back(&lambda_sigma_);
    return out;
}

// ---------------------------------------------------------------------------
// Branch B

BranchB::BranchB(BranchBConfig config, std::uint64_t seed) : config_(config) {
    if (config_.kernel % 2 == 0) throw DomainError("forecast-nets", "branch B filter size must be odd");
    if (config_.conv_channels == 0 || config_.head_channels == 0)
        throw DomainError("forecast-nets", "branch B channel counts must be positive");
    Rng rng = make_rng(seed, {hash_key("branch-b")});
    const std::size_t ch = config_.conv_channels, k = config_.kernel;
    for (std::size_t blk = 0; blk < 3; ++blk) {
        const std::size_t c_in = blk == 0 ? 1 : ch;
        const std::string id = std::to_string(blk);
        consumption_stack_.push_back(conv_kernel("b.cons" + id + ".k", ch, c_in, k, rng));
        consumption_stack_.push_back(zeros("b.cons" + id + ".b", {ch}));
    }
    for (std::size_t blk = 0; blk < 3; ++blk) {
        const std::size_t c_in = blk == 0 ? 1 : ch;
        const std::string id = std::to_string(blk);
        temperature_stack_.push_back(conv_kernel("b.temp" + id + ".k", ch, c_in, k, rng));
        temperature_stack_.push_back(zeros("b.temp" + id + ".b", {ch}));
    }
    const std::size_t flat = ch * block_lengths(kCurveHistoryHours).back() +
                             ch * block_lengths(kTemperatureHistoryHours).back() + kCalendarInputs;
    const std::size_t width = BranchBConfig::kDenseWidth;
    dense_w_ = ad::Parameter("b.dense.w", uniform_tensor({width, flat}, 1.0 / std::sqrt(static_cast<double>(flat)), rng));
    dense_b_ = zeros("b.dense.b", {width});
    head1_k_ = conv_kernel("b.head1.k", config_.head_channels, 2, k, rng);
    head1_b_ = zeros("b.head1.b", {config_.head_channels});
    head2_k_ = conv_kernel("b.head2.k", 2, config_.head_channels, k, rng);
    head2_b_ = zeros("b.head2.b", {2});
}

std::vector<std::size_t> BranchB::block_lengths(std::size_t length) const {
    std::vector<std::size_t> lengths;
    for (int blk = 0; blk < 3; ++blk) {
        if (length < config_.kernel)
            throw ShapeError("branch B input too short for filter size " + std::to_string(config_.kernel));
        length = ad::pooled_length(length, config_.pool, config_.stride);
        lengths.push_back(length);
    }
    return lengths;
}

template <typename Self>
DistributionVars BranchB::forward_impl(Self& self, ad::Graph& g, const SampleWindow& w) {
    const BranchBConfig& cfg = self.config_;
    auto stack = [&](auto& params, std::span<const double> series) {
        ad::Var x = g.constant(ad::Tensor({1, series.size()}, std::vector<double>(series.begin(), series.end())));
        for (std::size_t blk = 0; blk < 3; ++blk) {
            x = ad::conv1d(x, g.parameter(params[2 * blk]), g.parameter(params[2 * blk + 1]));
            x = ad::maxpool1d(ad::leaky_relu(x, cfg.slope), cfg.pool, cfg.stride);
        }
        return x;
    };
    const ad::Var cons = stack(self.consumption_stack_, w.branch_b.hourly_consumption);
    const ad::Var temp = stack(self.temperature_stack_, w.branch_b.hourly_temp_forecast);
    const auto cal = w.branch_b.calendar();
    const ad::Var calendar = g.constant(ad::Tensor::vector(std::vector<double>(cal.begin(), cal.end())));

    ad::Var h = ad::concat({cons, temp, calendar});
    h = ad::leaky_relu(ad::dense(h, g.parameter(self.dense_w_), g.parameter(self.dense_b_)), cfg.slope);
    h = ad::reshape(h, {2, 24});
    h = ad::leaky_relu(ad::conv1d(h, g.parameter(self.head1_k_), g.parameter(self.head1_b_)), cfg.slope);
    h = ad::conv1d(h, g.parameter(self.head2_k_), g.parameter(self.head2_b_));
    check_finite(h, "branch B head");
    return {ad::slice(h, 0, 24), ad::softplus(ad::slice(h, 24, 48))};
}

DistributionVars BranchB::forward(ad::Graph& g, const SampleWindow& w) { return forward_impl(*this, g, w); }

DistributionVars BranchB::forward(ad::Graph& g, const SampleWindow& w) const { return forward_impl(*this, g, w); }

ad::Var BranchB::loss(ad::Graph& g, const SampleWindow& w) {
    const auto out = forward(g, w);
    return lognormal_nll(out.mu, out.sigma, w.intraday_target);
}

ad::Var BranchB::loss(ad::Graph& g, const SampleWindow& w) const {
    const auto out = forward(g, w);
    return lognormal_nll(out.mu, out.sigma, w.intraday_target);
}

std::array<LognormalParams, 24> BranchB::predict(const SampleWindow& w) const {
    ad::Graph g;
    const auto out = forward(g, w);
    std::array<LognormalParams, 24> result;
    for (std::size_t k = 0; k < 24; ++k) result[k] = {out.mu.value()[k], out.sigma.value()[k]};
    return result;
}

std::vector<ad::Parameter*> BranchB::parameters() {
    std::vector<ad::Parameter*> out;
    for (auto& p : consumption_stack_) out.push_back(&p);
    for (auto& p : temperature_stack_) out.push_back(&p);
    for (auto* p : {&dense_w_, &dense_b_, &head1_k_, &head1_b_, &head2_k_, &head2_b_}) out.push_back(p);
    return out;
}

std::vector<const ad::Parameter*> BranchB::parameters() const {
    std::vector<const ad::Parameter*> out;
    for (const auto& p : consumption_stack_) out.push_back(&p);
    for (const auto& p : temperature_stack_) out.push_back(&p);
    for (const auto* p : {&dense_w_, &dense_b_, &head1_k_, &head1_b_, &head2_k_, &head2_b_}) out.push_back(p);
    return out;
}

}  // namespace loadcast
