#include "gcclust/data.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace gcclust {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, int lineno) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(lineno, "not a number: '" + s + "'");
    }
    return v;
}

}  // namespace

void AugmentSpec::validate() const {
    if (noise_sigma < 0.0) throw InvalidSpecError("AugmentSpec: noise_sigma must be >= 0");
    if (!(scale_lo > 0.0) || scale_lo > scale_hi) {
        throw InvalidSpecError("AugmentSpec: scale range must satisfy 0 < lo <= hi");
    }
    if (dropout_prob < 0.0 || dropout_prob >= 1.0) {
        throw InvalidSpecError("AugmentSpec: dropout_prob must lie in [0,1)");
    }
}

void MixtureSpec::validate() const {
    const std::size_t k = means.size();
    if (k == 0) throw InvalidSpecError("MixtureSpec: no components");
    if (stddevs.size() != k || counts.size() != k) {
        throw InvalidSpecError("MixtureSpec: means/stddevs/counts lengths differ");
    }
    const Eigen::Index dim = means[0].size();
    if (dim == 0) throw InvalidSpecError("MixtureSpec: zero-dimensional means");
    for (const Vec& m : means) {
        if (m.size() != dim) throw InvalidSpecError("MixtureSpec: means differ in dimension");
    }
    for (double s : stddevs) {
        if (s < 0.0 || !std::isfinite(s)) {
            throw InvalidSpecError("MixtureSpec: stddev must be finite and >= 0");
        }
    }
    for (int c : counts) {
        if (c <= 0) throw InvalidSpecError("MixtureSpec: counts must be positive");
    }
}

Dataset generate_mixture(const MixtureSpec& spec) {
    spec.validate();
    const int k = static_cast<int>(spec.means.size());
    const int dim = static_cast<int>(spec.means[0].size());
    int n = 0;
    for (int c : spec.counts) n += c;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> unit_normal(0.0, 1.0);

    Dataset ds;
    ds.x = Mat(n, dim);
    ds.labels = LabelVector(n);
    ds.name = spec.name;

    int row = 0;
    for (int c = 0; c < k; ++c) {
        for (int s = 0; s < spec.counts[c]; ++s) {
            for (int j = 0; j < dim; ++j) {
                ds.x(row, j) = spec.means[c][j] + spec.stddevs[c] * unit_normal(rng);
            }
            (*ds.labels)[row] = c;
            ++row;
        }
    }
    return ds;
}

Vec augment(const Vec& x, const AugmentSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    if (!all_finite(x)) throw InvalidSpecError("augment: non-finite input");

    // Draw order is fixed: scale, noise per coordinate, mask per coordinate.
    std::uniform_real_distribution<double> scale_dist(spec.scale_lo, spec.scale_hi);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::bernoulli_distribution drop(spec.dropout_prob);

    const double s = scale_dist(rng);
    Vec out = s * x;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double noise = spec.noise_sigma * unit_normal(rng);
        if (drop(rng)) out[i] = 0.0;
        out[i] += noise;
    }
    return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    if (ds.labels && static_cast<int>(ds.labels->size()) != ds.n()) {
        throw DimMismatchError("save_dataset: label count differs from sample count");
    }
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw Error("cannot open " + path.string() + " for writing");

    for (int j = 0; j < ds.dim(); ++j) {
        if (j) out << ',';
        out << 'f' << j;
    }
    if (ds.labels) out << ",label";
    out << '\n';

    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.dim(); ++j) {
            if (j) out << ',';
            out << format_double(ds.x(i, j));
        }
        if (ds.labels) out << ',' << (*ds.labels)[i];
        out << '\n';
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(1, "empty file");
    ++lineno;

    auto header = split_csv_line(line);
    bool has_label = !header.empty() && header.back() == "label";
    const int dim = static_cast<int>(header.size()) - (has_label ? 1 : 0);
    if (dim <= 0) throw ParseError(lineno, "header has no feature columns");
    for (int j = 0; j < dim; ++j) {
        if (header[j] != "f" + std::to_string(j)) {
            throw ParseError(lineno, "expected header column 'f" + std::to_string(j) + "'");
        }
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != dim + (has_label ? 1 : 0)) {
            throw ParseError(lineno, "expected " + std::to_string(dim + (has_label ? 1 : 0)) +
                                         " columns, got " + std::to_string(fields.size()));
        }
        std::vector<double> row(dim);
        for (int j = 0; j < dim; ++j) row[j] = parse_double(fields[j], lineno);
        rows.push_back(std::move(row));
        if (has_label) {
            const double lab = parse_double(fields[dim], lineno);
            const int ilab = static_cast<int>(lab);
            if (ilab < 0 || static_cast<double>(ilab) != lab) {
                throw ParseError(lineno, "label must be a nonnegative integer");
            }
            labels.push_back(ilab);
        }
    }

    Dataset ds;
    ds.x = Mat(static_cast<int>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < dim; ++j) ds.x(static_cast<int>(i), j) = rows[i][j];
    }
    if (has_label) ds.labels = std::move(labels);
    ds.name = path.stem().string();
    return ds;
}

}  // namespace gcclust
