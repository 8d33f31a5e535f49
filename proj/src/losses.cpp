#include "gcclust/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gcclust {

namespace {

// log Σ exp(terms), max-subtracted. Terms must be nonempty.
double log_sum_exp(const std::vector<double>& terms) {
    const double m = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

struct GcOptions {
    bool skip_empty_negatives = false;  // rgc batch rule vs. hard gc error
};

// Shared core of the graph-contrastive losses. Feature row a corresponds to
// global node nodes[a]; edge membership and degree weights come from the
// global Laplacian. The diagonal never enters either index set: pairs with
// equal global ids are excluded, matching L_ii = 1 ≠ 0 for connected nodes.
FeatureLossOutput gc_core(const Mat& features, const LaplacianView& laplacian,
                          std::span<const int> nodes, double tau, const GcOptions& opts) {
    const int m = static_cast<int>(features.rows());
    if (static_cast<int>(nodes.size()) != m) {
        throw ShapeMismatchError("gc loss: feature rows and node ids differ in count");
    }
    if (!(tau > 0.0)) throw InvalidSpecError("gc loss: tau must be positive");
    if (!all_finite(features)) throw InvalidSpecError("gc loss: non-finite features");
    const KnnGraph& graph = laplacian.graph();
    for (int a = 0; a < m; ++a) {
        if (nodes[a] < 0 || nodes[a] >= graph.n) {
            throw ShapeMismatchError("gc loss: node id out of range");
        }
    }

    Mat sims = features * features.transpose();

    FeatureLossOutput out;
    out.dfeatures = Mat::Zero(features.rows(), features.cols());

    struct AnchorTerms {
        std::vector<int> pos, neg;
        std::vector<double> pos_coef, neg_coef;  // softmax weights
    };

    std::vector<AnchorTerms> anchors(m);
    std::vector<bool> contributes(m, false);
    double loss_sum = 0.0;
    int contributing = 0;

    std::vector<double> pos_terms, neg_terms;
    for (int a = 0; a < m; ++a) {
        const int ga = nodes[a];
        AnchorTerms& t = anchors[a];
        pos_terms.clear();
        neg_terms.clear();
        for (int b = 0; b < m; ++b) {
            const int gb = nodes[b];
            if (b == a || gb == ga) continue;
            if (graph.has_edge(ga, gb)) {
                // -L_ij = 1/sqrt(d_i d_j), folded into log space
                const double logw = -0.5 * (std::log(static_cast<double>(graph.degrees[ga])) +
                                            std::log(static_cast<double>(graph.degrees[gb])));
                t.pos.push_back(b);
                pos_terms.push_back(sims(a, b) / tau + logw);
            } else {
                t.neg.push_back(b);
                neg_terms.push_back(sims(a, b) / tau);
            }
        }
        if (t.pos.empty()) throw NoPositivesError(ga);
        if (t.neg.empty()) {
            if (opts.skip_empty_negatives) continue;
            throw NoNegativesError(ga);
        }

        const double log_num = log_sum_exp(pos_terms);
        const double log_den = log_sum_exp(neg_terms);
        loss_sum += log_den - log_num;
        contributes[a] = true;
        ++contributing;

        t.pos_coef.resize(t.pos.size());
        for (std::size_t r = 0; r < t.pos.size(); ++r) {
            t.pos_coef[r] = std::exp(pos_terms[r] - log_num);
        }
        t.neg_coef.resize(t.neg.size());
        for (std::size_t r = 0; r < t.neg.size(); ++r) {
            t.neg_coef[r] = std::exp(neg_terms[r] - log_den);
        }
    }

    if (contributing == 0) throw EmptyBatchLossError();
    out.value = loss_sum / contributing;

    const double scale = 1.0 / (contributing * tau);
    for (int a = 0; a < m; ++a) {
        if (!contributes[a]) continue;
        const AnchorTerms& t = anchors[a];
        for (std::size_t r = 0; r < t.pos.size(); ++r) {
            const int b = t.pos[r];
            const double c = -t.pos_coef[r] * scale;
            out.dfeatures.row(a) += c * features.row(b);
            out.dfeatures.row(b) += c * features.row(a);
        }
        for (std::size_t r = 0; r < t.neg.size(); ++r) {
            const int b = t.neg[r];
            const double c = t.neg_coef[r] * scale;
            out.dfeatures.row(a) += c * features.row(b);
            out.dfeatures.row(b) += c * features.row(a);
        }
    }

    if (!std::isfinite(out.value) || !all_finite(out.dfeatures)) {
        throw Error("gc loss: non-finite result");
    }
    return out;
}

}  // namespace

void Temperatures::validate() const {
    if (!(tau_r > 0.0) || !(tau_a > 0.0)) {
        throw InvalidSpecError("temperatures must be strictly positive");
    }
}

void LossWeights::validate() const {
    if (lambda < 0.0 || eta < 0.0) {
        throw InvalidSpecError("loss weights must be nonnegative");
    }
}

double similarity(const UnitVector& x, const UnitVector& y, double tau) {
    if (!(tau > 0.0)) throw InvalidSpecError("similarity: tau must be positive");
    if (x.dim() != y.dim()) throw ShapeMismatchError("similarity: dimension mismatch");
    return std::exp(x.vec().dot(y.vec()) / tau);
}

FeatureLossOutput gc_loss(const Mat& features, const LaplacianView& laplacian, double tau) {
    if (features.rows() != laplacian.n()) {
        throw ShapeMismatchError("gc_loss: feature count differs from graph size");
    }
    std::vector<int> nodes(laplacian.n());
    std::iota(nodes.begin(), nodes.end(), 0);
    return gc_core(features, laplacian, nodes, tau, {.skip_empty_negatives = false});
}

FeatureLossOutput rgc_loss(const Mat& aug_features, std::span<const int> batch_nodes,
                           const LaplacianView& laplacian, double tau_r) {
    return gc_core(aug_features, laplacian, batch_nodes, tau_r,
                   {.skip_empty_negatives = true});
}

AgcLossOutput agc_loss(const Mat& q, const Mat& q_tilde, double tau_a) {
    if (q.rows() != q_tilde.rows() || q.cols() != q_tilde.cols()) {
        throw ShapeMismatchError("agc_loss: matrices must have identical shape");
    }
    if (q.cols() < 1 || q.rows() < 1) throw ShapeMismatchError("agc_loss: empty input");
    if (!(tau_a > 0.0)) throw InvalidSpecError("agc_loss: tau must be positive");
    if (!all_finite(q) || !all_finite(q_tilde)) {
        throw InvalidSpecError("agc_loss: non-finite input");
    }

    const int k = static_cast<int>(q.cols());
    // Column Gram matrix of logits: M_ij = q'_i · q̃'_j / τ
    Mat logits = (q.transpose() * q_tilde) / tau_a;

    double loss = 0.0;
    Mat softmax(k, k);
    for (int i = 0; i < k; ++i) {
        const double m = logits.row(i).maxCoeff();
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += std::exp(logits(i, j) - m);
        const double lse = m + std::log(s);
        loss -= logits(i, i) - lse;
        for (int j = 0; j < k; ++j) softmax(i, j) = std::exp(logits(i, j) - lse);
    }
    loss /= k;

    Mat dlogits = (softmax - Mat::Identity(k, k)) / (k * tau_a);

    AgcLossOutput out;
    out.value = loss;
    out.dq = q_tilde * dlogits.transpose();
    out.dq_tilde = q * dlogits;
    if (!std::isfinite(out.value) || !all_finite(out.dq) || !all_finite(out.dq_tilde)) {
        throw Error("agc_loss: non-finite result");
    }
    return out;
}

CrLossOutput cr_loss(const Mat& q) {
    if (q.rows() < 1 || q.cols() < 1) throw ShapeMismatchError("cr_loss: empty input");
    if (!all_finite(q)) throw InvalidSpecError("cr_loss: non-finite input");
    if (q.minCoeff() < -1e-6) throw InvalidSpecError("cr_loss: negative probability mass");

    const int k = static_cast<int>(q.cols());
    Vec col_mass = q.colwise().sum();
    const double total = col_mass.sum();
    if (!(total > 0.0)) throw InvalidSpecError("cr_loss: zero total mass");

    double entropy = 0.0;
    Vec log_share(k);
    for (int j = 0; j < k; ++j) {
        const double z = col_mass[j] / total;
        if (z > 0.0) {
            log_share[j] = std::log(z);
            entropy -= z * log_share[j];
        } else {
            // entropy slope is unbounded at z = 0; clamp keeps the gradient finite
            log_share[j] = std::log(std::numeric_limits<double>::min());
        }
    }

    CrLossOutput out;
    out.value = std::max(0.0, std::log(static_cast<double>(k)) - entropy);
    out.dq = Mat(q.rows(), k);
    for (int j = 0; j < k; ++j) {
        out.dq.col(j).setConstant((log_share[j] + entropy) / total);
    }
    return out;
}

TotalLossOutput total_loss(const FeatureLossOutput& rgc, const AgcLossOutput& agc,
                           const CrLossOutput& cr, const LossWeights& weights) {
    weights.validate();
    if (agc.dq.rows() != cr.dq.rows() || agc.dq.cols() != cr.dq.cols()) {
        throw ShapeMismatchError("total_loss: agc and cr gradients differ in shape");
    }
    TotalLossOutput out;
    out.value = rgc.value + weights.lambda * agc.value + weights.eta * cr.value;
    out.dfeatures = rgc.dfeatures;
    out.dq = weights.lambda * agc.dq + weights.eta * cr.dq;
    out.dq_tilde = weights.lambda * agc.dq_tilde;
    return out;
}

}  // namespace gcclust
