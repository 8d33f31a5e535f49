#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gcclust/types.hpp"

namespace gcclust {

enum class Activation { Identity, ReLU };

struct DenseLayer {
    Mat W;  // out × in
    Vec b;  // out
    Activation act = Activation::Identity;
};

/// Shapes of the encoder: trunk widths, representation dim d, cluster count K.
struct LayerSpec {
    int input_dim = 0;
    std::vector<int> trunk_widths;
    int rep_dim = 0;
    int num_clusters = 0;
    void validate() const;  // InvalidSpecError
};

/// Shared trunk feeding a representation head (L2-normalized output z) and an
/// assignment head (softmax output p).
struct EncoderParams {
    std::vector<DenseLayer> trunk;  // ReLU layers
    DenseLayer rep_head;            // identity
    DenseLayer assign_head;         // identity; softmax applied in forward

    LayerSpec spec() const;
};

/// Everything backward needs: inputs, per-layer pre-activations/activations,
/// and both head outputs.
struct ForwardTrace {
    Vec input;
    std::vector<Vec> trunk_pre;
    std::vector<Vec> trunk_act;
    Vec rep_pre;  // u, before normalization
    Vec z;        // u / ‖u‖
    Vec logits;
    Vec p;        // softmax(logits)
};

/// Gradient (or velocity) buffers mirroring EncoderParams shapes.
struct ParamGrads {
    std::vector<Mat> trunk_dW;
    std::vector<Vec> trunk_db;
    Mat rep_dW;
    Vec rep_db;
    Mat assign_dW;
    Vec assign_db;

    static ParamGrads zeros_like(const EncoderParams& params);
    void add_scaled(const ParamGrads& other, double s);
    double squared_norm() const;
};

Vec dense_forward(const DenseLayer& layer, const Vec& x, Vec* pre_activation = nullptr);

// Backprop through one dense layer: accumulates dW/db and returns the
// gradient w.r.t. the layer input. `pre` is the stored pre-activation.
Vec dense_backward(const DenseLayer& layer, const Vec& input, const Vec& pre,
                   const Vec& dout, Mat& dW, Vec& db);

ForwardTrace forward(const EncoderParams& params, const Vec& x);

/// Exact reverse-mode gradients of a batch given upstream grads dz (w.r.t.
/// the normalized z) and dp (w.r.t. the softmax p); row t of dz/dp pairs with
/// traces[t]. Accumulation order is fixed (trace order), so results are
/// reproducible.
ParamGrads backward(const EncoderParams& params, const std::vector<ForwardTrace>& traces,
                    const Mat& dz, const Mat& dp);

/// Xavier-uniform weights, zero biases, deterministic under seed.
EncoderParams init_params(const LayerSpec& spec, std::uint64_t seed);

// Versioned JSON checkpoint; round-trips weights bit-exactly.
void save_checkpoint(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_checkpoint(const std::filesystem::path& path);

}  // namespace gcclust
