#pragma once

#include <span>

#include "gcclust/graph.hpp"
#include "gcclust/types.hpp"

namespace gcclust {

/// Temperatures of the two contrastive heads.
struct Temperatures {
    double tau_r = 0.1;
    double tau_a = 1.0;
    void validate() const;
};

/// Weights of the assignment-contrastive and regularization terms in the
/// combined objective.
struct LossWeights {
    double lambda = 0.5;
    double eta = 1.0;
    void validate() const;
};

struct FeatureLossOutput {
    double value = 0.0;
    Mat dfeatures;  // same shape as the feature input
};

struct AgcLossOutput {
    double value = 0.0;
    Mat dq;        // gradient w.r.t. the anchor assignment matrix
    Mat dq_tilde;  // gradient w.r.t. the neighbor assignment matrix
};

struct CrLossOutput {
    double value = 0.0;
    Mat dq;
};

/// Combined objective with gradients already scaled by their weights.
struct TotalLossOutput {
    double value = 0.0;
    Mat dfeatures;
    Mat dq;
    Mat dq_tilde;
};

/// Temperature-scaled exponential similarity e^{x·y/τ}.
double similarity(const UnitVector& x, const UnitVector& y, double tau);

/// Graph-contrastive loss over a full graph: per node, the negative log ratio
/// of Laplacian-weighted neighbor similarity to non-neighbor similarity,
/// averaged over nodes. Gradient is w.r.t. every feature row. Every node must
/// have at least one neighbor (NoPositivesError) and one non-neighbor
/// (NoNegativesError).
FeatureLossOutput gc_loss(const Mat& features, const LaplacianView& laplacian, double tau);

/// Same loss restricted to a batch: feature row a corresponds to global node
/// batch_nodes[a]; neighbor weights use global degrees. Anchors with no
/// in-batch non-neighbor are skipped and the mean is taken over contributing
/// anchors; EmptyBatchLossError if none contribute.
FeatureLossOutput rgc_loss(const Mat& aug_features, std::span<const int> batch_nodes,
                           const LaplacianView& laplacian, double tau_r);

/// Assignment-contrastive loss over cluster columns: cross-entropy aligning
/// column i of q with column i of q̃ against all columns of q̃.
AgcLossOutput agc_loss(const Mat& q, const Mat& q_tilde, double tau_a);

/// Cluster regularization: log K minus the entropy of the normalized
/// per-cluster mass distribution. Zero iff the column masses are uniform.
CrLossOutput cr_loss(const Mat& q);

/// Weighted combination: rgc + λ·agc + η·cr, gradients pre-scaled.
TotalLossOutput total_loss(const FeatureLossOutput& rgc, const AgcLossOutput& agc,
                           const CrLossOutput& cr, const LossWeights& weights);

}  // namespace gcclust
