#pragma once

#include <filesystem>
#include <iosfwd>
#include <random>
#include <vector>

#include "gcclust/types.hpp"

namespace gcclust {

/// Per-sample moving average z̄ of encoder features, renormalized to the unit
/// sphere after every blend: z̄ ← normalize((1−α)·z̄_prev + α·z).
class EmbeddingStore {
public:
    // Epoch-0 state: z̄ = z0 (rows renormalized on ingest).
    EmbeddingStore(Mat z0, double alpha);

    // Blend in the features of the next epoch and increment the epoch counter.
    // Throws ZeroVectorError if a blended row vanishes (antipodal inputs).
    void update(const Mat& z_t);

    int n() const { return static_cast<int>(zbar_.rows()); }
    int dim() const { return static_cast<int>(zbar_.cols()); }
    int epoch() const { return t_; }
    double alpha() const { return alpha_; }
    const Mat& embeddings() const { return zbar_; }

private:
    Mat zbar_;
    double alpha_;
    int t_ = 0;
};

/// Symmetric KNN graph: A_ij = 1 iff j is among the k cosine-nearest of i or
/// vice versa. Zero diagonal; degrees taken from the symmetrized adjacency.
struct KnnGraph {
    int n = 0;
    int k = 0;
    std::vector<std::vector<int>> adj;  // sorted, symmetric neighbor lists
    std::vector<int> degrees;

    bool has_edge(int i, int j) const;
    static KnnGraph from_edges(int n, int k, const std::vector<std::pair<int, int>>& edges);
};

enum class KnnMethod {
    BruteForce,  // reference path: full sort of every candidate list
    HeapSelect,  // partial-sort pruning; must produce the identical graph
};

// Neighbor ranking: descending dot product, ties toward the lower index,
// self excluded. Rows of `unit_rows` must be unit vectors.
KnnGraph build_knn_graph(const Mat& unit_rows, int k,
                         KnnMethod method = KnnMethod::BruteForce);
KnnGraph build_knn_graph(const EmbeddingStore& store, int k,
                         KnnMethod method = KnnMethod::BruteForce);

// First graph of a run, from the epoch-0 moving average (z̄ = z⁽⁰⁾).
KnnGraph init_graph(const EmbeddingStore& store, int k);

/// Entrywise view of L = I − D^{−1/2} A D^{−1/2}; nothing is densified.
class LaplacianView {
public:
    explicit LaplacianView(const KnnGraph& graph);  // IsolatedNodeError if any d_i = 0
    double operator()(int i, int j) const;
    int n() const { return graph_->n; }
    const KnnGraph& graph() const { return *graph_; }

private:
    const KnnGraph* graph_;
};

// Uniform draw from the neighbors of node i.
int random_neighbor(const KnnGraph& graph, int i, std::mt19937_64& rng);

// Edge-list text format: header "n k", then one "i j" per line, i < j, ascending.
void save_edge_list(const KnnGraph& graph, std::ostream& out);
void save_edge_list(const KnnGraph& graph, const std::filesystem::path& path);
KnnGraph load_edge_list(std::istream& in);
KnnGraph load_edge_list(const std::filesystem::path& path);

}  // namespace gcclust
