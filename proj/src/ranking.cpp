#include "cnma/ranking.hpp"

#include "cnma/rng.hpp"
#include "csv.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace cnma {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

EffectSamples sample_effects(const FitResult& fit,
                             const std::vector<ContrastVector>& contrasts,
                             const std::vector<std::string>& labels,
                             int reference, int n_samples, std::uint64_t seed,
                             SampleMode mode) {
    const int k = static_cast<int>(contrasts.size());
    if (k == 0 || static_cast<int>(labels.size()) != k)
        throw ValidationError("sampling needs matching contrasts and labels");
    if (reference < 0 || reference >= k)
        throw ValidationError("reference index out of range");
    if (n_samples < 1)
        throw ValidationError("at least one sample is required");
    if (contrasts[reference].coeffs.norm() != 0.0)
        throw ValidationError(
            "the reference contrast must be identically zero");

    Eigen::VectorXd mean(k);
    Eigen::MatrixXd A(k, fit.beta.size());
    for (int i = 0; i < k; ++i) {
        if (contrasts[i].coeffs.size() != fit.beta.size())
            throw ValidationError("contrast length does not match the fit");
        mean(i) = contrasts[i].coeffs.dot(fit.beta);
        A.row(i) = contrasts[i].coeffs.transpose();
    }

    EffectSamples out;
    out.labels = labels;
    out.reference = reference;
    out.seed = seed;
    out.mode = mode;
    out.draws.resize(n_samples, k);

    if (mode == SampleMode::Joint) {
        const Eigen::MatrixXd cov = A * fit.cov * A.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        const Eigen::VectorXd ev = es.eigenvalues();
        const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
        Eigen::VectorXd sd = Eigen::VectorXd::Zero(k);
        for (int i = 0; i < k; ++i) {
            if (ev(i) < -1e-10 * scale)
                throw ValidationError(
                    "set covariance is not positive semi-definite "
                    "(eigenvalue " + std::to_string(ev(i)) + ")");
            sd(i) = std::sqrt(std::max(ev(i), 0.0));
        }
        const Eigen::MatrixXd L = es.eigenvectors() * sd.asDiagonal();
        Eigen::VectorXd z(k);
        for (int s = 0; s < n_samples; ++s) {
            for (int j = 0; j < k; ++j)
                z(j) = normal_draw(seed, static_cast<std::uint64_t>(s),
                                   static_cast<std::uint64_t>(j));
            out.draws.row(s) = (mean + L * z).transpose();
            out.draws(s, reference) = 0.0;
        }
    } else {
        Eigen::VectorXd sd(k);
        for (int i = 0; i < k; ++i) {
            const double var = contrasts[i].coeffs.dot(fit.cov * contrasts[i].coeffs);
            sd(i) = std::sqrt(std::max(var, 0.0));
        }
        for (int s = 0; s < n_samples; ++s) {
            for (int j = 0; j < k; ++j)
                out.draws(s, j) =
                    mean(j) + sd(j) * normal_draw(seed, static_cast<std::uint64_t>(s),
                                                  static_cast<std::uint64_t>(j));
            out.draws(s, reference) = 0.0;
        }
    }
    return out;
}

EffectSamples read_samples_csv(const std::string& path,
                               const std::vector<std::string>& labels,
                               const std::string& reference_label) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    ++lineno;
    const auto header = detail::split_csv(line, path, lineno);

    const int k = static_cast<int>(labels.size());
    if (static_cast<int>(header.size()) != k)
        throw ValidationError(path + ": expected " + std::to_string(k) +
                              " sample columns, found " +
                              std::to_string(header.size()));
    // Map file columns onto the requested label order.
    std::vector<int> to_internal(header.size(), -1);
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = detail::trim(header[c]);
        for (int i = 0; i < k; ++i)
            if (labels[i] == name) {
                to_internal[c] = i;
                break;
            }
        if (to_internal[c] < 0)
            throw ValidationError(path + ": unexpected sample column '" + name +
                                  "'");
    }
    std::vector<bool> seen(k, false);
    for (int i : to_internal) {
        if (seen[i])
            throw ValidationError(path + ": duplicate sample column '" +
                                  labels[i] + "'");
        seen[i] = true;
    }

    int reference = -1;
    for (int i = 0; i < k; ++i)
        if (labels[i] == reference_label) reference = i;
    if (reference < 0)
        throw ValidationError("reference '" + reference_label +
                              "' is not among the sample columns");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line, path, lineno);
        if (static_cast<int>(f.size()) != k)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(k) + " fields");
        std::vector<double> row(k);
        for (int c = 0; c < k; ++c) {
            try {
                row[to_internal[c]] = std::stod(f[c]);
            } catch (const std::exception&) {
                throw IoError(path + ":" + std::to_string(lineno) +
                              ": cannot parse '" + f[c] + "'");
            }
        }
        if (std::fabs(row[reference]) > 1e-12)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": reference column '" + reference_label +
                                  "' must be identically zero");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError(path + ": no sample rows");

    EffectSamples out;
    out.labels = labels;
    out.reference = reference;
    out.external = true;
    out.draws.resize(static_cast<int>(rows.size()), k);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < k; ++c) out.draws(static_cast<int>(r), c) = rows[r][c];
    return out;
}

void write_samples_csv(const std::string& path, const EffectSamples& s) {
    std::ofstream outf(path);
    if (!outf) throw IoError("cannot write '" + path + "'");
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
        if (i) outf << ',';
        outf << detail::csv_field(s.labels[i]);
    }
    outf << '\n';
    for (int r = 0; r < s.draws.rows(); ++r) {
        for (int c = 0; c < s.draws.cols(); ++c) {
            if (c) outf << ',';
            outf << format_double(s.draws(r, c));
        }
        outf << '\n';
    }
}

std::vector<double> p_best(const EffectSamples& s, Orientation o) {
    const int n = static_cast<int>(s.draws.rows());
    const int k = static_cast<int>(s.draws.cols());
    std::vector<double> wins(k, 0.0);
    std::vector<int> best;
    for (int r = 0; r < n; ++r) {
        best.clear();
        double bestv = s.draws(r, 0);
        best.push_back(0);
        for (int c = 1; c < k; ++c) {
            const double v = s.draws(r, c);
            const bool better = (o == Orientation::LargerBetter) ? v > bestv
                                                                 : v < bestv;
            if (better) {
                bestv = v;
                best.assign(1, c);
            } else if (v == bestv) {
                best.push_back(c);
            }
        }
        const double share = 1.0 / static_cast<double>(best.size());
        for (int c : best) wins[c] += share;
    }
    for (double& w : wins) w /= static_cast<double>(n);
    return wins;
}

Eigen::MatrixXi sample_ranks(const EffectSamples& s, Orientation o) {
    const int n = static_cast<int>(s.draws.rows());
    const int k = static_cast<int>(s.draws.cols());
    Eigen::MatrixXi ranks(n, k);
    for (int r = 0; r < n; ++r) {
        for (int i = 0; i < k; ++i) {
            int beats = 0;
            for (int j = 0; j < k; ++j) {
                if (j == i) continue;
                const double a = s.draws(r, i), b = s.draws(r, j);
                if (o == Orientation::LargerBetter ? a > b : a < b) ++beats;
            }
            ranks(r, i) = k - beats; // ties share the worse rank
        }
    }
    return ranks;
}

std::vector<double> expected_rank(const Eigen::MatrixXi& ranks) {
    std::vector<double> out(ranks.cols());
    for (int c = 0; c < ranks.cols(); ++c)
        out[c] = ranks.col(c).cast<double>().mean();
    return out;
}

std::vector<double> median_rank(const Eigen::MatrixXi& ranks) {
    const int n = static_cast<int>(ranks.rows());
    std::vector<double> out(ranks.cols());
    std::vector<int> col(n);
    for (int c = 0; c < ranks.cols(); ++c) {
        for (int r = 0; r < n; ++r) col[r] = ranks(r, c);
        std::sort(col.begin(), col.end());
        out[c] = (n % 2) ? col[n / 2]
                         : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    }
    return out;
}

std::vector<double> sucra(const std::vector<double>& expected_ranks) {
    const double k = static_cast<double>(expected_ranks.size());
    std::vector<double> out(expected_ranks.size());
    for (std::size_t i = 0; i < expected_ranks.size(); ++i)
        out[i] = k > 1 ? (k - expected_ranks[i]) / (k - 1.0) : 1.0;
    return out;
}

PScoreResult p_score(const FitResult& fit,
                     const std::vector<ContrastVector>& vs_reference,
                     Orientation o) {
    const int k = static_cast<int>(vs_reference.size());
    PScoreResult res;
    res.scores.assign(k, 0.0);
    if (k < 2) {
        res.scores.assign(k, 1.0);
        return res;
    }

    // Each unordered pair once; the mirror entry is 1 - value, which makes
    // the scores sum to k*(k-1)/2 exactly.
    std::vector<std::vector<double>> win(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const Eigen::VectorXd d =
                vs_reference[i].coeffs - vs_reference[j].coeffs;
            double diff = d.dot(fit.beta);
            if (o == Orientation::SmallerBetter) diff = -diff;
            const double var = d.dot(fit.cov * d);
            double p;
            if (var <= 0.0) {
                res.degenerate_pairs = true;
                p = diff > 0.0 ? 1.0 : (diff < 0.0 ? 0.0 : 0.5);
            } else {
                p = normal_cdf(diff / std::sqrt(var));
            }
            win[i][j] = p;
            win[j][i] = 1.0 - p;
        }
    }
    for (int i = 0; i < k; ++i) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j)
            if (j != i) sum += win[i][j];
        res.scores[i] = sum / static_cast<double>(k - 1);
    }
    return res;
}

bool metric_sorts_descending(HierarchyMetric m, Orientation o) {
    switch (m) {
        case HierarchyMetric::PBest:
        case HierarchyMetric::Sucra:
        case HierarchyMetric::PScore:
            return true;
        case HierarchyMetric::MedianRank:
        case HierarchyMetric::ExpectedRank:
            return false;
        case HierarchyMetric::PointEstimate:
            return o == Orientation::LargerBetter;
    }
    return true;
}

Hierarchy build_hierarchy(const std::vector<std::string>& labels,
                          const std::vector<double>& metric_values,
                          const std::vector<RelativeEffect>& vs_reference,
                          HierarchyMetric metric, Orientation o) {
    const std::size_t k = labels.size();
    if (metric_values.size() != k || vs_reference.size() != k)
        throw ValidationError("hierarchy inputs have mismatched lengths");

    Hierarchy h;
    h.metric = metric;
    h.orientation = o;

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    const bool desc = metric_sorts_descending(metric, o);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (metric_values[a] != metric_values[b])
            return desc ? metric_values[a] > metric_values[b]
                        : metric_values[a] < metric_values[b];
        return labels[a] < labels[b];
    });

    h.rows.resize(k);
    for (std::size_t r = 0; r < k; ++r) {
        const int i = order[r];
        HierarchyRow& row = h.rows[r];
        row.label = labels[i];
        row.metric = metric_values[i];
        row.vs_reference = vs_reference[i];
        // Exact metric ties share the position of the first tied row.
        row.position = (r > 0 && metric_values[i] == h.rows[r - 1].metric)
                           ? h.rows[r - 1].position
                           : static_cast<int>(r) + 1;
    }
    return h;
}

} // namespace cnma
