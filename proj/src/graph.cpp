#include "gcclust/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

namespace gcclust {

namespace {

Mat normalize_rows(const Mat& z) {
    Mat out(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double norm = z.row(i).norm();
        if (norm <= kZeroNormTol) {
            throw ZeroVectorError("embedding row " + std::to_string(i) + " has zero norm");
        }
        out.row(i) = z.row(i) / norm;
    }
    return out;
}

}  // namespace

EmbeddingStore::EmbeddingStore(Mat z0, double alpha) : alpha_(alpha) {
    if (z0.rows() == 0 || z0.cols() == 0 || !all_finite(z0)) {
        throw InvalidSpecError("EmbeddingStore: empty or non-finite initial embeddings");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw InvalidSpecError("EmbeddingStore: alpha must lie in (0,1]");
    }
    zbar_ = normalize_rows(z0);
}

void EmbeddingStore::update(const Mat& z_t) {
    if (z_t.rows() != zbar_.rows() || z_t.cols() != zbar_.cols()) {
        throw ShapeMismatchError("EmbeddingStore::update: dimension mismatch");
    }
    if (!all_finite(z_t)) {
        throw InvalidSpecError("EmbeddingStore::update: non-finite embeddings");
    }
    zbar_ = normalize_rows((1.0 - alpha_) * zbar_ + alpha_ * z_t);
    ++t_;
}

bool KnnGraph::has_edge(int i, int j) const {
    const auto& nb = adj[i];
    return std::binary_search(nb.begin(), nb.end(), j);
}

KnnGraph KnnGraph::from_edges(int n, int k, const std::vector<std::pair<int, int>>& edges) {
    KnnGraph g;
    g.n = n;
    g.k = k;
    g.adj.assign(n, {});
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
            throw InvalidSpecError("KnnGraph::from_edges: bad edge");
        }
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
    }
    g.degrees.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& nb = g.adj[i];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        g.degrees[i] = static_cast<int>(nb.size());
    }
    return g;
}

KnnGraph build_knn_graph(const Mat& unit_rows, int k, KnnMethod method) {
    const int n = static_cast<int>(unit_rows.rows());
    if (k < 1 || k >= n) {
        throw InvalidKError("build_knn_graph: k must satisfy 1 <= k < n (k=" +
                            std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    for (int i = 0; i < n; ++i) {
        if (std::abs(unit_rows.row(i).norm() - 1.0) > 1e-6) {
            throw InvalidSpecError("build_knn_graph: row " + std::to_string(i) +
                                   " is not unit-norm");
        }
    }

    // Cosine similarity on the unit sphere is the plain dot product.
    Mat sims = unit_rows * unit_rows.transpose();

    KnnGraph g;
    g.n = n;
    g.k = k;
    g.adj.assign(n, {});

    std::vector<int> cand(n - 1);
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j != i) cand[m++] = j;
        }
        auto closer = [&](int a, int b) {
            if (sims(i, a) != sims(i, b)) return sims(i, a) > sims(i, b);
            return a < b;
        };
        if (method == KnnMethod::BruteForce) {
            std::sort(cand.begin(), cand.end(), closer);
        } else {
            std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), closer);
        }
        for (int r = 0; r < k; ++r) {
            const int j = cand[r];
            // OR-symmetrization
            g.adj[i].push_back(j);
            g.adj[j].push_back(i);
        }
    }

    g.degrees.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& nb = g.adj[i];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        g.degrees[i] = static_cast<int>(nb.size());
    }
    return g;
}

KnnGraph build_knn_graph(const EmbeddingStore& store, int k, KnnMethod method) {
    return build_knn_graph(store.embeddings(), k, method);
}

KnnGraph init_graph(const EmbeddingStore& store, int k) {
    return build_knn_graph(store, k);
}

LaplacianView::LaplacianView(const KnnGraph& graph) : graph_(&graph) {
    for (int i = 0; i < graph.n; ++i) {
        if (graph.degrees[i] == 0) throw IsolatedNodeError(i);
    }
}

double LaplacianView::operator()(int i, int j) const {
    if (i == j) return 1.0;
    if (!graph_->has_edge(i, j)) return 0.0;
    return -1.0 / std::sqrt(static_cast<double>(graph_->degrees[i]) *
                            static_cast<double>(graph_->degrees[j]));
}

int random_neighbor(const KnnGraph& graph, int i, std::mt19937_64& rng) {
    const auto& nb = graph.adj[i];
    if (nb.empty()) throw IsolatedNodeError(i);
    std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
    return nb[pick(rng)];
}

void save_edge_list(const KnnGraph& graph, std::ostream& out) {
    out << graph.n << ' ' << graph.k << '\n';
    for (int i = 0; i < graph.n; ++i) {
        for (int j : graph.adj[i]) {
            if (i < j) out << i << ' ' << j << '\n';
        }
    }
}

void save_edge_list(const KnnGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    save_edge_list(graph, out);
}

KnnGraph load_edge_list(std::istream& in) {
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    ++lineno;
    int n = 0, k = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> n >> k) || n <= 0) throw ParseError(lineno, "bad header, expected 'n k'");
    }
    std::vector<std::pair<int, int>> edges;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream es(line);
        int i = 0, j = 0;
        if (!(es >> i >> j) || i >= j || i < 0 || j >= n) {
            throw ParseError(lineno, "bad edge, expected 'i j' with i < j < n");
        }
        edges.emplace_back(i, j);
    }
    return KnnGraph::from_edges(n, k, edges);
}

KnnGraph load_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return load_edge_list(in);
}

}  // namespace gcclust
