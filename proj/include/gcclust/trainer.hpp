#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include "gcclust/data.hpp"
#include "gcclust/graph.hpp"
#include "gcclust/losses.hpp"
#include "gcclust/metrics.hpp"
#include "gcclust/model.hpp"

namespace gcclust {

/// All hyperparameters of a training run. Defaults follow the reference
/// recipe: SGD(lr 0.4, momentum 0.9, weight decay 1e-4), cosine decay to
/// 0.1·lr0, batch 256, τ_r = 0.1, τ_a = 1.0, α = 0.5, λ = 0.5, η = 1.0, k = 5.
struct RunConfig {
    double tau_r = 0.1;
    double tau_a = 1.0;
    double alpha = 0.5;
    double lambda = 0.5;
    double eta = 1.0;
    int k = 5;  // KNN neighbor parameter
    double lr0 = 0.4;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    int batch_size = 256;
    int epochs = 0;
    double lr_floor_ratio = 0.1;
    std::uint64_t seed = 0;
    LayerSpec layer_spec;
    AugmentSpec augment_spec;

    // Ablation switches. With rgc_use_graph off, graph positives are replaced
    // by each anchor's own second augmentation; with agc_use_graph off, q̃' is
    // built from the anchors' second-view assignments instead of neighbors.
    bool rgc_use_graph = true;
    bool agc_use_graph = true;

    void validate(int n_samples) const;
};

struct TrainState {
    EncoderParams params;
    ParamGrads velocity;
    EmbeddingStore store;
    KnnGraph graph;
    int epoch = 0;
    int global_step = 0;
    std::mt19937_64 rng;
    Mat last_z;  // full-dataset features from the most recent full pass
    Mat last_p;
};

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;  // learning rate applied to the last batch of the epoch
    double loss_total = 0.0;
    double loss_rgc = 0.0;
    double loss_agc = 0.0;
    double loss_cr = 0.0;
    double acc = 0.0;  // 0 when the dataset has no labels
    double nmi = 0.0;
    double ari = 0.0;
    double top5nn = 0.0;
};

struct BatchSample {
    std::vector<int> anchors;
    std::vector<int> neighbors;  // neighbors[i] is a uniform neighbor of anchors[i]
};

/// Anchors drawn without replacement (batch_size = n gives a permutation);
/// one uniform graph neighbor per anchor.
BatchSample sample_batch_with_neighbors(const KnnGraph& graph, int n, int batch_size,
                                        std::mt19937_64& rng);

/// Cosine schedule from lr0 down to floor_ratio·lr0 over total_steps.
double cosine_lr(int step, int total_steps, double lr0, double floor_ratio);

/// g ← grad + wd·param;  v ← momentum·v + g;  param ← param − lr·v.
void sgd_step(EncoderParams& params, const ParamGrads& grads, ParamGrads& velocity,
              double lr, double momentum, double weight_decay);

/// One pass of the training loop: per batch, sample anchors+neighbors,
/// augment, forward both heads, combine the three losses, backprop and step;
/// afterwards refresh the moving average, rebuild the KNN graph, and score
/// the full dataset.
EpochLog train_epoch(TrainState& state, const Dataset& dataset, const RunConfig& config,
                     int total_steps);

// Batch forward over the rows of x; fills Z (unit rows) and P (row-stochastic).
void forward_all(const EncoderParams& params, const Mat& x, Mat& z, Mat& p);

/// Full-dataset metric report (acc/nmi/ari plus a top-k table). Throws
/// MissingLabelsError when the dataset has no ground truth.
MetricReport evaluate(const EncoderParams& params, const Dataset& dataset,
                      const std::vector<int>& topk_list);

struct TrainResult {
    EncoderParams params;
    std::vector<EpochLog> logs;
    MetricReport final_metrics;  // zeros when the dataset has no labels
};

using EpochCallback = std::function<void(const EpochLog&, const EncoderParams&)>;

/// Full run: init params and graph from the epoch-0 features, then
/// config.epochs training epochs. Deterministic for fixed (dataset, config).
TrainResult train(const Dataset& dataset, const RunConfig& config,
                  const EpochCallback& on_epoch = {});

// train_log.csv writer; shortest round-trip float formatting, LF endings.
void write_train_log_csv(const std::vector<EpochLog>& logs, std::ostream& out);

}  // namespace gcclust
