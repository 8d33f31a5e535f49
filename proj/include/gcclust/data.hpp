#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gcclust/types.hpp"

namespace gcclust {

struct Dataset {
    Mat x;  // N × d
    std::optional<LabelVector> labels;
    std::string name;

    int n() const { return static_cast<int>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }
};

/// Stochastic vector augmentation: x' = mask ⊙ (s·x) + ε with s ~ U(lo,hi),
/// ε ~ N(0, σ²I), mask_i = 0 with probability dropout_prob.
struct AugmentSpec {
    double noise_sigma = 0.0;
    double scale_lo = 1.0;
    double scale_hi = 1.0;
    double dropout_prob = 0.0;
    void validate() const;
};

/// Isotropic Gaussian mixture with one component per cluster.
struct MixtureSpec {
    std::vector<Vec> means;
    std::vector<double> stddevs;  // σ ≥ 0; σ = 0 collapses onto the mean
    std::vector<int> counts;
    std::uint64_t seed = 0;
    std::string name = "mixture";
    void validate() const;
};

Dataset generate_mixture(const MixtureSpec& spec);

Vec augment(const Vec& x, const AugmentSpec& spec, std::mt19937_64& rng);

// CSV: header "f0,...,f{d-1}[,label]", one sample per row, LF endings.
// Doubles are written in shortest round-trip decimal form.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace gcclust
