#include "gcclust/model.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "json.hpp"

namespace gcclust {

namespace {

Vec apply_activation(const Vec& pre, Activation act) {
    if (act == Activation::Identity) return pre;
    return pre.cwiseMax(0.0);
}

Vec activation_grad(const Vec& pre, const Vec& dact, Activation act) {
    if (act == Activation::Identity) return dact;
    Vec out = dact;
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
        if (pre[i] <= 0.0) out[i] = 0.0;
    }
    return out;
}

Vec softmax(const Vec& logits) {
    const double m = logits.maxCoeff();
    Vec e = (logits.array() - m).exp();
    return e / e.sum();
}

DenseLayer xavier_layer(int in, int out, Activation act, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer;
    layer.W = Mat(out, in);
    for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) layer.W(r, c) = dist(rng);
    }
    layer.b = Vec::Zero(out);
    layer.act = act;
    return layer;
}

using json = nlohmann::json;

json layer_to_json(const DenseLayer& layer) {
    json j;
    j["rows"] = layer.W.rows();
    j["cols"] = layer.W.cols();
    std::vector<double> w(layer.W.size());
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
            w[r * layer.W.cols() + c] = layer.W(r, c);  // row-major payload
        }
    }
    j["W"] = w;
    j["b"] = std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size());
    j["act"] = layer.act == Activation::ReLU ? "relu" : "identity";
    return j;
}

DenseLayer layer_from_json(const json& j) {
    DenseLayer layer;
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto w = j.at("W").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (rows <= 0 || cols <= 0 || static_cast<int>(w.size()) != rows * cols ||
        static_cast<int>(b.size()) != rows) {
        throw ParseError(0, "checkpoint layer has inconsistent shapes");
    }
    layer.W = Mat(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) layer.W(r, c) = w[r * cols + c];
    }
    layer.b = Eigen::Map<const Vec>(b.data(), rows);
    const std::string act = j.at("act").get<std::string>();
    if (act == "relu") {
        layer.act = Activation::ReLU;
    } else if (act == "identity") {
        layer.act = Activation::Identity;
    } else {
        throw ParseError(0, "unknown activation '" + act + "'");
    }
    return layer;
}

}  // namespace

void LayerSpec::validate() const {
    if (input_dim <= 0) throw InvalidSpecError("LayerSpec: input_dim must be positive");
    if (rep_dim <= 0) throw InvalidSpecError("LayerSpec: rep_dim must be positive");
    if (num_clusters <= 0) throw InvalidSpecError("LayerSpec: num_clusters must be positive");
    for (int w : trunk_widths) {
        if (w <= 0) throw InvalidSpecError("LayerSpec: trunk widths must be positive");
    }
}

LayerSpec EncoderParams::spec() const {
    LayerSpec s;
    s.input_dim = trunk.empty() ? static_cast<int>(rep_head.W.cols())
                                : static_cast<int>(trunk.front().W.cols());
    for (const auto& layer : trunk) s.trunk_widths.push_back(static_cast<int>(layer.W.rows()));
    s.rep_dim = static_cast<int>(rep_head.W.rows());
    s.num_clusters = static_cast<int>(assign_head.W.rows());
    return s;
}

ParamGrads ParamGrads::zeros_like(const EncoderParams& params) {
    ParamGrads g;
    for (const auto& layer : params.trunk) {
        g.trunk_dW.push_back(Mat::Zero(layer.W.rows(), layer.W.cols()));
        g.trunk_db.push_back(Vec::Zero(layer.b.size()));
    }
    g.rep_dW = Mat::Zero(params.rep_head.W.rows(), params.rep_head.W.cols());
    g.rep_db = Vec::Zero(params.rep_head.b.size());
    g.assign_dW = Mat::Zero(params.assign_head.W.rows(), params.assign_head.W.cols());
    g.assign_db = Vec::Zero(params.assign_head.b.size());
    return g;
}

void ParamGrads::add_scaled(const ParamGrads& other, double s) {
    for (std::size_t i = 0; i < trunk_dW.size(); ++i) {
        trunk_dW[i] += s * other.trunk_dW[i];
        trunk_db[i] += s * other.trunk_db[i];
    }
    rep_dW += s * other.rep_dW;
    rep_db += s * other.rep_db;
    assign_dW += s * other.assign_dW;
    assign_db += s * other.assign_db;
}

double ParamGrads::squared_norm() const {
    double s = rep_dW.squaredNorm() + rep_db.squaredNorm() + assign_dW.squaredNorm() +
               assign_db.squaredNorm();
    for (const auto& m : trunk_dW) s += m.squaredNorm();
    for (const auto& v : trunk_db) s += v.squaredNorm();
    return s;
}

Vec dense_forward(const DenseLayer& layer, const Vec& x, Vec* pre_activation) {
    if (x.size() != layer.W.cols()) {
        throw ShapeMismatchError("dense_forward: input dim " + std::to_string(x.size()) +
                                 " != layer in dim " + std::to_string(layer.W.cols()));
    }
    Vec pre = layer.W * x + layer.b;
    if (pre_activation) *pre_activation = pre;
    return apply_activation(pre, layer.act);
}

Vec dense_backward(const DenseLayer& layer, const Vec& input, const Vec& pre,
                   const Vec& dout, Mat& dW, Vec& db) {
    if (dout.size() != layer.W.rows() || input.size() != layer.W.cols()) {
        throw ShapeMismatchError("dense_backward: gradient shape mismatch");
    }
    Vec dpre = activation_grad(pre, dout, layer.act);
    dW += dpre * input.transpose();
    db += dpre;
    return layer.W.transpose() * dpre;
}

ForwardTrace forward(const EncoderParams& params, const Vec& x) {
    ForwardTrace t;
    t.input = x;
    Vec h = x;
    for (const auto& layer : params.trunk) {
        Vec pre;
        h = dense_forward(layer, h, &pre);
        t.trunk_pre.push_back(std::move(pre));
        t.trunk_act.push_back(h);
    }
    t.rep_pre = dense_forward(params.rep_head, h);
    const double norm = t.rep_pre.norm();
    if (norm <= kZeroNormTol) throw ZeroVectorError("forward: representation collapsed to zero");
    t.z = t.rep_pre / norm;
    t.logits = dense_forward(params.assign_head, h);
    t.p = softmax(t.logits);
    return t;
}

ParamGrads backward(const EncoderParams& params, const std::vector<ForwardTrace>& traces,
                    const Mat& dz, const Mat& dp) {
    const int batch = static_cast<int>(traces.size());
    if (dz.rows() != batch || dp.rows() != batch) {
        throw ShapeMismatchError("backward: upstream gradient rows != trace count");
    }
    ParamGrads grads = ParamGrads::zeros_like(params);

    for (int t = 0; t < batch; ++t) {
        const ForwardTrace& trace = traces[t];
        if (dz.cols() != trace.z.size() || dp.cols() != trace.p.size()) {
            throw ShapeMismatchError("backward: upstream gradient cols mismatch");
        }

        // softmax Jacobian: dlogits = p ⊙ dp − (p·dp) p
        Vec dp_t = dp.row(t).transpose();
        Vec dlogits = trace.p.cwiseProduct(dp_t) - trace.p.dot(dp_t) * trace.p;

        // normalization Jacobian: du = (I − zzᵀ) dz / ‖u‖
        Vec dz_t = dz.row(t).transpose();
        const double norm = trace.rep_pre.norm();
        Vec du = (dz_t - trace.z.dot(dz_t) * trace.z) / norm;

        const Vec& h = trace.trunk_act.empty() ? trace.input : trace.trunk_act.back();
        Vec dh = dense_backward(params.rep_head, h, trace.rep_pre, du, grads.rep_dW,
                                grads.rep_db);
        dh += dense_backward(params.assign_head, h, trace.logits, dlogits, grads.assign_dW,
                             grads.assign_db);

        for (int l = static_cast<int>(params.trunk.size()) - 1; l >= 0; --l) {
            const Vec& in = l == 0 ? trace.input : trace.trunk_act[l - 1];
            dh = dense_backward(params.trunk[l], in, trace.trunk_pre[l], dh,
                                grads.trunk_dW[l], grads.trunk_db[l]);
        }
    }
    return grads;
}

EncoderParams init_params(const LayerSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    EncoderParams params;
    int in = spec.input_dim;
    for (int width : spec.trunk_widths) {
        params.trunk.push_back(xavier_layer(in, width, Activation::ReLU, rng));
        in = width;
    }
    params.rep_head = xavier_layer(in, spec.rep_dim, Activation::Identity, rng);
    params.assign_head = xavier_layer(in, spec.num_clusters, Activation::Identity, rng);
    return params;
}

void save_checkpoint(const EncoderParams& params, const std::filesystem::path& path) {
    json j;
    j["format"] = "gcclust-checkpoint";
    j["version"] = 1;
    j["trunk"] = json::array();
    for (const auto& layer : params.trunk) j["trunk"].push_back(layer_to_json(layer));
    j["rep_head"] = layer_to_json(params.rep_head);
    j["assign_head"] = layer_to_json(params.assign_head);
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

EncoderParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "gcclust-checkpoint") {
            throw ParseError(0, "not a gcclust checkpoint");
        }
        if (j.at("version").get<int>() != 1) {
            throw ParseError(0, "unsupported checkpoint version");
        }
        EncoderParams params;
        for (const auto& layer : j.at("trunk")) params.trunk.push_back(layer_from_json(layer));
        params.rep_head = layer_from_json(j.at("rep_head"));
        params.assign_head = layer_from_json(j.at("assign_head"));
        return params;
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("malformed checkpoint: ") + e.what());
    }
}

}  // namespace gcclust
