#include "gcclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace gcclust {

namespace {

void check_lengths(const LabelVector& pred, const LabelVector& truth) {
    if (pred.size() != truth.size()) {
        throw LengthMismatchError("label vectors differ in length (" +
                                  std::to_string(pred.size()) + " vs " +
                                  std::to_string(truth.size()) + ")");
    }
    if (pred.empty()) throw LengthMismatchError("label vectors are empty");
}

int num_classes(const LabelVector& labels) {
    int k = 0;
    for (int l : labels) {
        if (l < 0) throw InvalidSpecError("labels must be nonnegative");
        k = std::max(k, l + 1);
    }
    return k;
}

// Minimum-cost assignment on a square matrix (Kuhn-Munkres with potentials,
// O(n^3)). Returns the total minimum cost.
long long hungarian_min_cost(const std::vector<std::vector<long long>>& a) {
    const int n = static_cast<int>(a.size());
    const long long INF = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), INF);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            long long delta = INF;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long long cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    long long cost = 0;
    for (int j = 1; j <= n; ++j) {
        if (p[j]) cost += a[p[j] - 1][j - 1];
    }
    return cost;
}

double entropy(const std::vector<long long>& marginals, long long n) {
    double h = 0.0;
    for (long long c : marginals) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

// First-occurrence canonical relabeling, for partition identity checks.
LabelVector canonical(const LabelVector& labels) {
    LabelVector out(labels.size());
    std::map<int, int> remap;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    return out;
}

double choose2(long long x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

std::string format_metric(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ContingencyTable ContingencyTable::from_labels(const LabelVector& pred,
                                               const LabelVector& truth) {
    check_lengths(pred, truth);
    const int kp = num_classes(pred);
    const int kt = num_classes(truth);
    ContingencyTable t;
    t.counts.assign(kp, std::vector<long long>(kt, 0));
    t.row_marginals.assign(kp, 0);
    t.col_marginals.assign(kt, 0);
    t.n = static_cast<long long>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ++t.counts[pred[i]][truth[i]];
        ++t.row_marginals[pred[i]];
        ++t.col_marginals[truth[i]];
    }
    return t;
}

double clustering_accuracy(const LabelVector& pred, const LabelVector& truth) {
    ContingencyTable t = ContingencyTable::from_labels(pred, truth);
    const int kp = static_cast<int>(t.row_marginals.size());
    const int kt = static_cast<int>(t.col_marginals.size());
    const int k = std::max(kp, kt);

    // negate counts and zero-pad to a square so minimization maximizes matches
    std::vector<std::vector<long long>> cost(k, std::vector<long long>(k, 0));
    for (int i = 0; i < kp; ++i) {
        for (int j = 0; j < kt; ++j) cost[i][j] = -t.counts[i][j];
    }
    const long long matched = -hungarian_min_cost(cost);
    return static_cast<double>(matched) / static_cast<double>(t.n);
}

double nmi(const LabelVector& pred, const LabelVector& truth) {
    ContingencyTable t = ContingencyTable::from_labels(pred, truth);
    const double hu = entropy(t.row_marginals, t.n);
    const double hv = entropy(t.col_marginals, t.n);
    if (hu == 0.0 && hv == 0.0) return 1.0;
    if (hu == 0.0 || hv == 0.0) return 0.0;

    double mi = 0.0;
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
        for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
            const long long c = t.counts[i][j];
            if (c > 0) {
                const double pij = static_cast<double>(c) / t.n;
                mi += pij * std::log(static_cast<double>(c) * t.n /
                                     (static_cast<double>(t.row_marginals[i]) *
                                      static_cast<double>(t.col_marginals[j])));
            }
        }
    }
    return mi / std::sqrt(hu * hv);
}

double ari(const LabelVector& pred, const LabelVector& truth) {
    check_lengths(pred, truth);
    if (pred.size() < 2) throw LengthMismatchError("ari requires n >= 2");
    ContingencyTable t = ContingencyTable::from_labels(pred, truth);

    double sum_ij = 0.0;
    for (const auto& row : t.counts) {
        for (long long c : row) sum_ij += choose2(c);
    }
    double sum_a = 0.0, sum_b = 0.0;
    for (long long c : t.row_marginals) sum_a += choose2(c);
    for (long long c : t.col_marginals) sum_b += choose2(c);

    const double expected = sum_a * sum_b / choose2(t.n);
    const double denom = 0.5 * (sum_a + sum_b) - expected;
    if (denom == 0.0) return canonical(pred) == canonical(truth) ? 1.0 : 0.0;
    return (sum_ij - expected) / denom;
}

double topk_nn_accuracy(const Mat& features, const LabelVector& truth, int k) {
    const int n = static_cast<int>(features.rows());
    if (static_cast<int>(truth.size()) != n) {
        throw LengthMismatchError("topk_nn_accuracy: label count differs from feature rows");
    }
    if (k < 1 || k >= n) {
        throw InvalidKError("topk_nn_accuracy: k must satisfy 1 <= k < n");
    }

    Mat sims = features * features.transpose();
    std::vector<int> cand(n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j != i) cand[m++] = j;
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), [&](int a, int b) {
            if (sims(i, a) != sims(i, b)) return sims(i, a) > sims(i, b);
            return a < b;
        });
        int hits = 0;
        for (int r = 0; r < k; ++r) {
            if (truth[cand[r]] == truth[i]) ++hits;
        }
        total += static_cast<double>(hits) / k;
    }
    return total / n;
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["acc"] = acc;
    j["nmi"] = nmi;
    j["ari"] = ari;
    nlohmann::json jk = nlohmann::json::object();
    for (const auto& [k, v] : topk) jk[std::to_string(k)] = v;
    j["topk"] = jk;
    return j.dump(2);
}

std::string MetricReport::csv_header() const {
    std::string h = "acc,nmi,ari";
    for (const auto& [k, v] : topk) h += ",top" + std::to_string(k) + "nn";
    return h;
}

std::string MetricReport::to_csv_line() const {
    std::string line = format_metric(acc) + "," + format_metric(nmi) + "," + format_metric(ari);
    for (const auto& [k, v] : topk) line += "," + format_metric(v);
    return line;
}

}  // namespace gcclust
