#include "loadcast/model_io.hpp"

#include <fstream>
#include <utility>

#include <json.hpp>

#include "loadcast/error.hpp"

namespace loadcast {

using nlohmann::json;

namespace {

constexpr const char* kModule = "forecast-nets";
constexpr const char* kFormat = "loadcast-model";

json to_json(const FeatureScale& s) { return {{"center", s.center}, {"iqr", s.iqr}}; }

json to_json(const ScalingParams& s) {
    return {{"consumption_iqr", s.consumption_iqr},         {"epsilon", s.epsilon},
            {"temperature", to_json(s.temperature)},         {"daily_temperature", to_json(s.daily_temperature)},
            {"month", to_json(s.month)},                     {"day_of_month", to_json(s.day_of_month)}};
}

json to_json(const TrainHistory& h) {
    return {{"train_loss", h.train_loss}, {"test_loss", h.test_loss}, {"best_epoch", h.best_epoch}};
}

json to_json(const std::vector<const ad::Parameter*>& params) {
    json out = json::array();
    for (const ad::Parameter* p : params) {
        const auto data = p->value.data();
        out.push_back({{"name", p->name},
                       {"shape", p->value.shape()},
                       {"data", std::vector<double>(data.begin(), data.end())}});
    }
    return out;
}

/// Checked field access with a readable path in the error.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

    Reader at(const std::string& key) const {
        if (!node_.is_object() || !node_.contains(key)) fail("missing field '" + key + "'");
        return {node_.at(key), path_ + "." + key};
    }

    template <typename T>
    T get(const std::string& key) const {
        const Reader r = at(key);
        try {
            return r.node_.get<T>();
        } catch (const json::exception& e) {
            r.fail(e.what());
        }
    }

    const json& node() const { return node_; }
    [[noreturn]] void fail(const std::string& message) const { throw InputError(kModule, path_ + ": " + message); }

private:
    const json& node_;
    std::string path_;
};

FeatureScale read_scale(const Reader& r) { return {r.get<double>("center"), r.get<double>("iqr")}; }

ScalingParams read_scaling(const Reader& r) {
    ScalingParams s;
    s.consumption_iqr = r.get<double>("consumption_iqr");
    s.epsilon = r.get<double>("epsilon");
    s.temperature = read_scale(r.at("temperature"));
    s.daily_temperature = read_scale(r.at("daily_temperature"));
    s.month = read_scale(r.at("month"));
    s.day_of_month = read_scale(r.at("day_of_month"));
    try {
        s.validate();
    } catch (const Error& e) {
        r.fail(e.what());
    }
    return s;
}

TrainHistory read_history(const Reader& r) {
    TrainHistory h;
    h.train_loss = r.get<std::vector<double>>("train_loss");
    h.test_loss = r.get<std::vector<double>>("test_loss");
    h.best_epoch = r.get<std::size_t>("best_epoch");
    return h;
}

void read_parameters(const Reader& r, std::vector<ad::Parameter*> params) {
    if (!r.node().is_array() || r.node().size() != params.size())
        r.fail("expected " + std::to_string(params.size()) + " parameter tensors");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Reader entry(r.node()[i], "parameter " + params[i]->name);
        const auto name = entry.get<std::string>("name");
        if (name != params[i]->name) entry.fail("found '" + name + "' in its place");
        const auto shape = entry.get<ad::Shape>("shape");
        if (shape != params[i]->value.shape())
            entry.fail("shape " + ad::to_string(shape) + " does not match the architecture's " +
                       ad::to_string(params[i]->value.shape()));
        auto data = entry.get<std::vector<double>>("data");
        if (data.size() != params[i]->value.size()) entry.fail("wrong number of values");
        params[i]->value = ad::Tensor(shape, std::move(data));
    }
}

}  // namespace

void save_model(std::ostream& out, const Model& model) {
    const BranchAConfig& a = model.branch_a.config();
    const BranchBConfig& b = model.branch_b.config();
    const DecayParams decay = model.branch_a.decay();
    json doc = {
        {"format", kFormat},
        {"version", kModelFormatVersion},
        {"seed", model.seed},
        {"scaling", to_json(model.scaling)},
        {"training",
         {{"learning_rate", model.training.learning_rate},
          {"batch_size", model.training.batch_size},
          {"max_epochs", model.training.max_epochs},
          {"patience", model.training.patience},
          {"seed", model.training.seed}}},
        {"decay", {{"lambda_mu", decay.lambda_mu}, {"lambda_sigma", decay.lambda_sigma}}},
        {"branch_a",
         {{"hidden_layers", a.hidden_layers},
          {"hidden_width", a.hidden_width},
          {"slope", a.slope},
          {"sigma_max", a.sigma_max},
          {"parameters", to_json(std::as_const(model.branch_a).parameters())},
          {"history", to_json(model.history_a)}}},
        {"branch_b",
         {{"conv_channels", b.conv_channels},
          {"kernel", b.kernel},
          {"pool", b.pool},
          {"stride", b.stride},
          {"head_channels", b.head_channels},
          {"dense_width", BranchBConfig::kDenseWidth},
          {"slope", b.slope},
          {"padding", "same"},
          {"pooling", "valid"},
          {"parameters", to_json(std::as_const(model.branch_b).parameters())},
          {"history", to_json(model.history_b)}}},
    };
    out << doc.dump(1) << '\n';
    if (!out) throw InputError(kModule, "failed to write model");
}

void save_model(const std::filesystem::path& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(kModule, "cannot open " + path.string() + " for writing");
    save_model(out, model);
}

Model load_model(std::istream& in, const std::string& source) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(kModule, source + ": not a JSON model file: " + e.what());
    }
    const Reader root(doc, source);
    if (root.get<std::string>("format") != kFormat) root.fail("not a loadcast model file");
    const int version = root.get<int>("version");
    if (version != kModelFormatVersion) root.fail("unsupported model version " + std::to_string(version));

    const Reader ra = root.at("branch_a");
    BranchAConfig a;
    a.hidden_layers = ra.get<std::size_t>("hidden_layers");
    a.hidden_width = ra.get<std::size_t>("hidden_width");
    a.slope = ra.get<double>("slope");
    a.sigma_max = ra.get<double>("sigma_max");
    const Reader rd = root.at("decay");
    a.initial_decay = {rd.get<double>("lambda_mu"), rd.get<double>("lambda_sigma")};

    const Reader rb = root.at("branch_b");
    BranchBConfig b;
    b.conv_channels = rb.get<std::size_t>("conv_channels");
    b.kernel = rb.get<std::size_t>("kernel");
    b.pool = rb.get<std::size_t>("pool");
    b.stride = rb.get<std::size_t>("stride");
    b.head_channels = rb.get<std::size_t>("head_channels");
    b.slope = rb.get<double>("slope");
    if (rb.get<std::size_t>("dense_width") != BranchBConfig::kDenseWidth) rb.fail("unsupported dense width");
    if (rb.get<std::string>("padding") != "same") rb.fail("unsupported padding policy");
    if (rb.get<std::string>("pooling") != "valid") rb.fail("unsupported pooling policy");

    const Reader rt = root.at("training");
    TrainConfig training;
    training.learning_rate = rt.get<double>("learning_rate");
    training.batch_size = rt.get<std::size_t>("batch_size");
    training.max_epochs = rt.get<std::size_t>("max_epochs");
    training.patience = rt.get<std::size_t>("patience");
    training.seed = rt.get<std::uint64_t>("seed");

    const auto seed = root.get<std::uint64_t>("seed");
    Model model{seed, read_scaling(root.at("scaling")), training, BranchA(a, seed), BranchB(b, seed), {}, {}};
    read_parameters(ra.at("parameters"), model.branch_a.parameters());
    read_parameters(rb.at("parameters"), model.branch_b.parameters());
    const DecayParams decay = model.branch_a.decay();
    if (decay.lambda_mu != a.initial_decay.lambda_mu || decay.lambda_sigma != a.initial_decay.lambda_sigma)
        rd.fail("decay rates disagree with the stored branch parameters");
    model.history_a = read_history(ra.at("history"));
    model.history_b = read_history(rb.at("history"));
    return model;
}

void save_scaling(const std::filesystem::path& path, const ScalingParams& scaling) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("pipeline", "cannot open " + path.string() + " for writing");
    out << to_json(scaling).dump(1) << '\n';
}

ScalingParams load_scaling(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("pipeline", "cannot open scaling file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("pipeline", path.string() + ": not a JSON scaling file: " + e.what());
    }
    return read_scaling(Reader(doc, path.string()));
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(kModule, "cannot open model file " + path.string());
    return load_model(in, path.string());
}

}  // namespace loadcast
