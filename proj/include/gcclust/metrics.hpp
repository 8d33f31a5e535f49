#pragma once

#include <map>
#include <string>
#include <vector>

#include "gcclust/types.hpp"

namespace gcclust {

/// Joint label-count table between a predicted and a true partition.
struct ContingencyTable {
    std::vector<std::vector<long long>> counts;  // K_pred × K_true
    std::vector<long long> row_marginals;
    std::vector<long long> col_marginals;
    long long n = 0;

    static ContingencyTable from_labels(const LabelVector& pred, const LabelVector& truth);
};

/// Fraction of samples correctly labeled under the best one-to-one mapping of
/// predicted clusters onto true classes (Hungarian on the negated counts).
double clustering_accuracy(const LabelVector& pred, const LabelVector& truth);

/// I(U;V) / sqrt(H(U)·H(V)). Both partitions trivial → 1; exactly one
/// zero-entropy partition → 0.
double nmi(const LabelVector& pred, const LabelVector& truth);

/// Adjusted Rand index; zero adjusted denominator → 1 if the partitions are
/// identical, else 0.
double ari(const LabelVector& pred, const LabelVector& truth);

/// Mean over samples of the fraction of the k cosine-nearest neighbors that
/// share the sample's true label. Rows of `features` must be unit vectors.
double topk_nn_accuracy(const Mat& features, const LabelVector& truth, int k);

struct MetricReport {
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    std::map<int, double> topk;  // k → accuracy, ascending by key

    std::string to_json() const;
    std::string csv_header() const;
    std::string to_csv_line() const;
};

}  // namespace gcclust
