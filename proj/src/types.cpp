#include "gcclust/types.hpp"

#include <cmath>

namespace gcclust {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

UnitVector::UnitVector(Vec v) : v_(std::move(v)) {
    if (v_.size() == 0 || !all_finite(v_)) {
        throw InvalidSpecError("UnitVector: empty or non-finite input");
    }
    if (std::abs(v_.norm() - 1.0) > kUnitNormTol) {
        throw InvalidSpecError("UnitVector: norm deviates from 1 by more than 1e-9");
    }
}

ProbVector::ProbVector(Vec p) : p_(std::move(p)) {
    if (p_.size() == 0 || !all_finite(p_)) {
        throw InvalidSpecError("ProbVector: empty or non-finite input");
    }
    if (p_.minCoeff() < 0.0 || p_.maxCoeff() > 1.0) {
        throw InvalidSpecError("ProbVector: entries outside [0,1]");
    }
    if (std::abs(p_.sum() - 1.0) > kProbSumTol) {
        throw InvalidSpecError("ProbVector: entries do not sum to 1 within 1e-9");
    }
}

AssignmentMatrix::AssignmentMatrix(Mat rows) : rows_(std::move(rows)) {
    for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
        ProbVector check(rows_.row(i).transpose());  // validates row i
        (void)check;
    }
}

Vec AssignmentMatrix::column(int j) const {
    if (j < 0 || j >= k()) {
        throw ShapeMismatchError("AssignmentMatrix::column: index out of range");
    }
    return rows_.col(j);
}

UnitVector l2_normalize(const Vec& v) {
    if (!all_finite(v)) throw InvalidSpecError("l2_normalize: non-finite input");
    const double norm = v.norm();
    if (norm <= kZeroNormTol) throw ZeroVectorError();
    return UnitVector(v / norm);
}

int assign_cluster(const ProbVector& p) {
    const Vec& v = p.vec();
    int best = 0;
    for (int j = 1; j < p.k(); ++j) {
        if (v[j] > v[best]) best = j;
    }
    return best;
}

}  // namespace gcclust
