#include "gcclust/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace gcclust {

namespace {

constexpr std::uint64_t kTrainerStreamOffset = 0x9E3779B97F4A7C15ULL;

int ceil_div(int a, int b) { return (a + b - 1) / b; }

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void update_buffer(Mat& param, const Mat& grad, Mat& vel, double lr, double momentum,
                   double wd) {
    Mat g = grad + wd * param;
    vel = momentum * vel + g;
    param -= lr * vel;
}

void update_buffer(Vec& param, const Vec& grad, Vec& vel, double lr, double momentum,
                   double wd) {
    Vec g = grad + wd * param;
    vel = momentum * vel + g;
    param -= lr * vel;
}

// Views making up one training batch. Slot layout: anchors' first views,
// then anchors' second views (ablation modes only), then neighbor views
// deduplicated against the anchor set.
struct BatchViews {
    std::vector<int> node_of_slot;
    std::vector<int> neighbor_slot;  // per anchor: slot carrying its neighbor's view
    int num_anchors = 0;
    int num_second = 0;
};

BatchViews assemble_views(const BatchSample& sample, bool need_second, bool need_neighbors) {
    BatchViews v;
    const int b = static_cast<int>(sample.anchors.size());
    v.num_anchors = b;
    v.node_of_slot = sample.anchors;

    if (need_second) {
        v.num_second = b;
        for (int i = 0; i < b; ++i) v.node_of_slot.push_back(sample.anchors[i]);
    }

    if (need_neighbors) {
        std::unordered_map<int, int> anchor_slot;
        for (int i = 0; i < b; ++i) anchor_slot.emplace(sample.anchors[i], i);
        std::unordered_map<int, int> neighbor_slots;
        v.neighbor_slot.resize(b);
        for (int i = 0; i < b; ++i) {
            const int node = sample.neighbors[i];
            if (auto it = anchor_slot.find(node); it != anchor_slot.end()) {
                v.neighbor_slot[i] = it->second;
                continue;
            }
            auto [it, inserted] =
                neighbor_slots.try_emplace(node, static_cast<int>(v.node_of_slot.size()));
            if (inserted) v.node_of_slot.push_back(node);
            v.neighbor_slot[i] = it->second;
        }
    }
    return v;
}

}  // namespace

void RunConfig::validate(int n_samples) const {
    Temperatures{tau_r, tau_a}.validate();
    LossWeights{lambda, eta}.validate();
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidSpecError("alpha must lie in (0,1]");
    if (k < 1) throw InvalidSpecError("k must be >= 1");
    if (n_samples > 0 && k >= n_samples) throw InvalidSpecError("k must be < N");
    if (!(lr0 > 0.0)) throw InvalidSpecError("lr0 must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw InvalidSpecError("momentum must lie in [0,1)");
    if (weight_decay < 0.0) throw InvalidSpecError("weight_decay must be >= 0");
    if (batch_size < 1) throw InvalidSpecError("batch_size must be >= 1");
    if (n_samples > 0 && batch_size > n_samples) {
        throw InvalidSpecError("batch_size must be <= N");
    }
    if (epochs < 0) throw InvalidSpecError("epochs must be >= 0");
    if (!(lr_floor_ratio >= 0.0 && lr_floor_ratio <= 1.0)) {
        throw InvalidSpecError("lr_floor_ratio must lie in [0,1]");
    }
    augment_spec.validate();
}

BatchSample sample_batch_with_neighbors(const KnnGraph& graph, int n, int batch_size,
                                        std::mt19937_64& rng) {
    if (batch_size < 1 || batch_size > n) {
        throw InvalidSpecError("sample_batch_with_neighbors: need 1 <= batch_size <= n");
    }
    BatchSample out;
    out.anchors.resize(n);
    std::iota(out.anchors.begin(), out.anchors.end(), 0);
    // partial Fisher-Yates: first batch_size entries are a uniform sample
    // without replacement; batch_size = n yields a full permutation
    for (int i = 0; i < batch_size; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(out.anchors[i], out.anchors[pick(rng)]);
    }
    out.anchors.resize(batch_size);
    out.neighbors.reserve(batch_size);
    for (int a : out.anchors) out.neighbors.push_back(random_neighbor(graph, a, rng));
    return out;
}

double cosine_lr(int step, int total_steps, double lr0, double floor_ratio) {
    if (step < 0 || step > total_steps) {
        throw InvalidSpecError("cosine_lr: step must lie in [0, total_steps]");
    }
    if (total_steps == 0) return lr0;
    const double lr_min = floor_ratio * lr0;
    const double phase = M_PI * static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(phase));
}

void sgd_step(EncoderParams& params, const ParamGrads& grads, ParamGrads& velocity,
              double lr, double momentum, double weight_decay) {
    if (grads.trunk_dW.size() != params.trunk.size() ||
        velocity.trunk_dW.size() != params.trunk.size()) {
        throw ShapeMismatchError("sgd_step: buffer layer counts differ");
    }
    for (std::size_t l = 0; l < params.trunk.size(); ++l) {
        update_buffer(params.trunk[l].W, grads.trunk_dW[l], velocity.trunk_dW[l], lr,
                      momentum, weight_decay);
        update_buffer(params.trunk[l].b, grads.trunk_db[l], velocity.trunk_db[l], lr,
                      momentum, weight_decay);
    }
    update_buffer(params.rep_head.W, grads.rep_dW, velocity.rep_dW, lr, momentum,
                  weight_decay);
    update_buffer(params.rep_head.b, grads.rep_db, velocity.rep_db, lr, momentum,
                  weight_decay);
    update_buffer(params.assign_head.W, grads.assign_dW, velocity.assign_dW, lr, momentum,
                  weight_decay);
    update_buffer(params.assign_head.b, grads.assign_db, velocity.assign_db, lr, momentum,
                  weight_decay);
}

void forward_all(const EncoderParams& params, const Mat& x, Mat& z, Mat& p) {
    const int n = static_cast<int>(x.rows());
    if (n == 0) throw ShapeMismatchError("forward_all: empty input");
    ForwardTrace first = forward(params, x.row(0).transpose());
    z = Mat(n, first.z.size());
    p = Mat(n, first.p.size());
    z.row(0) = first.z;
    p.row(0) = first.p;
    for (int i = 1; i < n; ++i) {
        ForwardTrace t = forward(params, x.row(i).transpose());
        z.row(i) = t.z;
        p.row(i) = t.p;
    }
}

EpochLog train_epoch(TrainState& state, const Dataset& dataset, const RunConfig& config,
                     int total_steps) {
    const int n = dataset.n();
    const int b = config.batch_size;
    const int batches = ceil_div(n, b);
    const bool need_second = !config.rgc_use_graph || !config.agc_use_graph;
    const bool need_neighbors = config.rgc_use_graph || config.agc_use_graph;
    const LossWeights weights{config.lambda, config.eta};

    double sum_total = 0.0, sum_rgc = 0.0, sum_agc = 0.0, sum_cr = 0.0;
    double last_lr = 0.0;

    for (int batch = 0; batch < batches; ++batch) {
        // Step 1: anchors and one graph neighbor each
        BatchSample sample;
        if (need_neighbors) {
            sample = sample_batch_with_neighbors(state.graph, n, b, state.rng);
        } else {
            sample = sample_batch_with_neighbors(state.graph, n, b, state.rng);
            sample.neighbors.clear();  // pair-graph modes ignore graph neighbors
        }
        BatchViews views = assemble_views(sample, need_second, need_neighbors);
        const int num_slots = static_cast<int>(views.node_of_slot.size());

        // Step 2: one augmentation per slot, drawn in slot order
        std::vector<ForwardTrace> traces(num_slots);
        Mat z_views, p_views;
        {
            Mat aug(num_slots, dataset.dim());
            for (int s = 0; s < num_slots; ++s) {
                aug.row(s) = augment(dataset.x.row(views.node_of_slot[s]).transpose(),
                                     config.augment_spec, state.rng);
            }
            z_views = Mat(num_slots, 0);
            p_views = Mat(num_slots, 0);
            for (int s = 0; s < num_slots; ++s) {
                traces[s] = forward(state.params, aug.row(s).transpose());
                if (s == 0) {
                    z_views = Mat(num_slots, traces[0].z.size());
                    p_views = Mat(num_slots, traces[0].p.size());
                }
                z_views.row(s) = traces[s].z;
                p_views.row(s) = traces[s].p;
            }
        }

        // Step 3: representation graph contrastive
        FeatureLossOutput rgc;
        std::vector<int> rgc_slots;
        KnnGraph pair_graph;  // keeps the ablation Laplacian alive
        if (config.rgc_use_graph) {
            rgc_slots.reserve(num_slots - views.num_second);
            for (int s = 0; s < views.num_anchors; ++s) rgc_slots.push_back(s);
            for (int s = views.num_anchors + views.num_second; s < num_slots; ++s) {
                rgc_slots.push_back(s);
            }
            Mat feats(rgc_slots.size(), z_views.cols());
            std::vector<int> nodes(rgc_slots.size());
            for (std::size_t r = 0; r < rgc_slots.size(); ++r) {
                feats.row(r) = z_views.row(rgc_slots[r]);
                nodes[r] = views.node_of_slot[rgc_slots[r]];
            }
            LaplacianView lap(state.graph);
            rgc = rgc_loss(feats, nodes, lap, config.tau_r);
        } else {
            // self-augmentation positives: disjoint (view1, view2) pairs
            rgc_slots.resize(2 * views.num_anchors);
            std::iota(rgc_slots.begin(), rgc_slots.end(), 0);
            std::vector<std::pair<int, int>> pairs;
            for (int i = 0; i < views.num_anchors; ++i) {
                pairs.emplace_back(i, views.num_anchors + i);
            }
            pair_graph = KnnGraph::from_edges(2 * views.num_anchors, 1, pairs);
            Mat feats = z_views.topRows(2 * views.num_anchors);
            LaplacianView lap(pair_graph);
            rgc = rgc_loss(feats, rgc_slots, lap, config.tau_r);
        }

        // Steps 4-5: assignment contrastive and cluster regularization
        Mat q = p_views.topRows(views.num_anchors);
        Mat q_tilde(views.num_anchors, p_views.cols());
        for (int i = 0; i < views.num_anchors; ++i) {
            const int slot = config.agc_use_graph ? views.neighbor_slot[i]
                                                  : views.num_anchors + i;
            q_tilde.row(i) = p_views.row(slot);
        }
        AgcLossOutput agc = agc_loss(q, q_tilde, config.tau_a);
        CrLossOutput cr = cr_loss(q);

        // Step 6: combined objective, backprop, SGD update
        TotalLossOutput total = total_loss(rgc, agc, cr, weights);
        Mat dz = Mat::Zero(num_slots, z_views.cols());
        Mat dp = Mat::Zero(num_slots, p_views.cols());
        for (std::size_t r = 0; r < rgc_slots.size(); ++r) {
            dz.row(rgc_slots[r]) += total.dfeatures.row(r);
        }
        for (int i = 0; i < views.num_anchors; ++i) {
            dp.row(i) += total.dq.row(i);
            const int slot = config.agc_use_graph ? views.neighbor_slot[i]
                                                  : views.num_anchors + i;
            dp.row(slot) += total.dq_tilde.row(i);
        }
        ParamGrads grads = backward(state.params, traces, dz, dp);
        const double lr = cosine_lr(state.global_step, total_steps, config.lr0,
                                    config.lr_floor_ratio);
        sgd_step(state.params, grads, state.velocity, lr, config.momentum,
                 config.weight_decay);
        ++state.global_step;
        last_lr = lr;

        sum_total += total.value;
        sum_rgc += rgc.value;
        sum_agc += agc.value;
        sum_cr += cr.value;
    }

    // Step 7: refresh the moving average and the graph from a clean full pass
    forward_all(state.params, dataset.x, state.last_z, state.last_p);
    state.store.update(state.last_z);
    state.graph = build_knn_graph(state.store, config.k);
    ++state.epoch;

    EpochLog log;
    log.epoch = state.epoch;
    log.lr = last_lr;
    log.loss_total = sum_total / batches;
    log.loss_rgc = sum_rgc / batches;
    log.loss_agc = sum_agc / batches;
    log.loss_cr = sum_cr / batches;
    if (dataset.labels) {
        LabelVector pred(n);
        for (int i = 0; i < n; ++i) {
            pred[i] = assign_cluster(ProbVector(state.last_p.row(i).transpose()));
        }
        log.acc = clustering_accuracy(pred, *dataset.labels);
        log.nmi = nmi(pred, *dataset.labels);
        log.ari = ari(pred, *dataset.labels);
        log.top5nn = topk_nn_accuracy(state.last_z, *dataset.labels, std::min(5, n - 1));
    }
    return log;
}

MetricReport evaluate(const EncoderParams& params, const Dataset& dataset,
                      const std::vector<int>& topk_list) {
    if (!dataset.labels) throw MissingLabelsError();
    Mat z, p;
    forward_all(params, dataset.x, z, p);
    LabelVector pred(dataset.n());
    for (int i = 0; i < dataset.n(); ++i) {
        pred[i] = assign_cluster(ProbVector(p.row(i).transpose()));
    }
    MetricReport report;
    report.acc = clustering_accuracy(pred, *dataset.labels);
    report.nmi = nmi(pred, *dataset.labels);
    report.ari = ari(pred, *dataset.labels);
    for (int k : topk_list) {
        if (k >= 1 && k < dataset.n()) {
            report.topk[k] = topk_nn_accuracy(z, *dataset.labels, k);
        }
    }
    return report;
}

TrainResult train(const Dataset& dataset, const RunConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate(dataset.n());
    LayerSpec spec = config.layer_spec;
    if (spec.input_dim == 0) {
        spec.input_dim = dataset.dim();
    } else if (spec.input_dim != dataset.dim()) {
        throw DimMismatchError("layer_spec.input_dim differs from dataset dimension");
    }

    TrainResult result;
    result.params = init_params(spec, config.seed);

    Mat z0, p0;
    forward_all(result.params, dataset.x, z0, p0);

    TrainState state{
        .params = std::move(result.params),
        .velocity = {},
        .store = EmbeddingStore(z0, config.alpha),
        .graph = {},
        .epoch = 0,
        .global_step = 0,
        .rng = std::mt19937_64(config.seed + kTrainerStreamOffset),
        .last_z = std::move(z0),
        .last_p = std::move(p0),
    };
    state.velocity = ParamGrads::zeros_like(state.params);
    state.graph = init_graph(state.store, config.k);

    const int total_steps = config.epochs * ceil_div(dataset.n(), config.batch_size);
    for (int e = 0; e < config.epochs; ++e) {
        EpochLog log = train_epoch(state, dataset, config, total_steps);
        if (on_epoch) on_epoch(log, state.params);
        result.logs.push_back(log);
    }

    if (dataset.labels) {
        result.final_metrics = evaluate(state.params, dataset, {1, 5, 10, 20, 50});
    }
    result.params = std::move(state.params);
    return result;
}

void write_train_log_csv(const std::vector<EpochLog>& logs, std::ostream& out) {
    out << "epoch,lr,loss_total,loss_rgc,loss_agc,loss_cr,acc,nmi,ari,top5nn\n";
    for (const EpochLog& l : logs) {
        out << l.epoch << ',' << format_double(l.lr) << ',' << format_double(l.loss_total)
            << ',' << format_double(l.loss_rgc) << ',' << format_double(l.loss_agc) << ','
            << format_double(l.loss_cr) << ',' << format_double(l.acc) << ','
            << format_double(l.nmi) << ',' << format_double(l.ari) << ','
            << format_double(l.top5nn) << '\n';
    }
}

}  // namespace gcclust
