#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gcclust/errors.hpp"

namespace gcclust {

using Vec = Eigen::VectorXd;
// Row-major convention throughout: row i of a Mat is sample i.
using Mat = Eigen::MatrixXd;

// Hard label per sample, values in [0, K).
using LabelVector = std::vector<int>;

constexpr double kUnitNormTol = 1e-9;
constexpr double kProbSumTol = 1e-9;
constexpr double kZeroNormTol = 1e-12;

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// L2-normalized feature vector; |‖v‖ − 1| ≤ 1e-9 enforced at construction.
class UnitVector {
public:
    explicit UnitVector(Vec v);
    const Vec& vec() const { return v_; }
    int dim() const { return static_cast<int>(v_.size()); }

private:
    Vec v_;
};

/// Cluster assignment probabilities: entries in [0,1], summing to 1 within 1e-9.
class ProbVector {
public:
    explicit ProbVector(Vec p);
    const Vec& vec() const { return p_; }
    int k() const { return static_cast<int>(p_.size()); }

private:
    Vec p_;
};

/// N×K row-stochastic matrix of cluster probabilities. column(j) is the
/// per-cluster mass vector q'_j used by the assignment-contrastive loss.
class AssignmentMatrix {
public:
    explicit AssignmentMatrix(Mat rows);
    int n() const { return static_cast<int>(rows_.rows()); }
    int k() const { return static_cast<int>(rows_.cols()); }
    const Mat& rows() const { return rows_; }
    Vec column(int j) const;

private:
    Mat rows_;
};

/// Scale v to unit L2 norm. Throws ZeroVectorError if ‖v‖ ≤ 1e-12.
UnitVector l2_normalize(const Vec& v);

/// Argmax cluster index; ties broken toward the lowest index.
int assign_cluster(const ProbVector& p);

}  // namespace gcclust
