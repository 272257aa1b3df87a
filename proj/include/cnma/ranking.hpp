#pragma once

#include "cnma/fit.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cnma {

enum class Orientation { LargerBetter, SmallerBetter };

enum class SampleMode {
    Joint,       // multivariate normal, full covariance of the set
    Independent  // one normal per element, marginal variances only
};

// Sampled relative effects versus a reference element.  The reference column
// is identically zero; draws are row-major samples over the set.
struct EffectSamples {
    Eigen::MatrixXd draws;            // n_samples x n_elements
    std::vector<std::string> labels;  // element display labels
    int reference = 0;                // column index of the reference
    std::uint64_t seed = 0;
    SampleMode mode = SampleMode::Joint;
    bool external = false;            // read from file, not generated here
};

// Draws `n_samples` joint or independent normal samples of the given
// versus-reference contrasts from the fitted model.  `contrasts[i]` must be
// the coefficient vector of elements[i] vs the reference (all-zero for the
// reference itself).  Joint mode uses the eigendecomposition of the contrast
// covariance (tiny negative eigenvalues are clamped to zero; genuinely
// indefinite covariance is a ValidationError).
EffectSamples sample_effects(const FitResult& fit,
                             const std::vector<ContrastVector>& contrasts,
                             const std::vector<std::string>& labels,
                             int reference, int n_samples, std::uint64_t seed,
                             SampleMode mode);

// Reads externally produced samples (CSV, header = element labels).  The
// column set must match `labels` exactly (any order) and the reference column
// must be identically zero.
EffectSamples read_samples_csv(const std::string& path,
                               const std::vector<std::string>& labels,
                               const std::string& reference_label);

void write_samples_csv(const std::string& path, const EffectSamples& s);

// Probability of being ranked first under the orientation (ties split
// equally among the tied elements).
std::vector<double> p_best(const EffectSamples& s, Orientation o);

// Per-sample ranks: rank(i) = n_elements - #{j != i : i strictly beats j};
// tied elements share the worse (larger) rank.
Eigen::MatrixXi sample_ranks(const EffectSamples& s, Orientation o);

std::vector<double> expected_rank(const Eigen::MatrixXi& ranks);
// Even sample counts average the two middle order statistics.
std::vector<double> median_rank(const Eigen::MatrixXi& ranks);

// SUCRA from the expected rank: (n - E[rank]) / (n - 1).
std::vector<double> sucra(const std::vector<double>& expected_ranks);

struct PScoreResult {
    std::vector<double> scores;
    // Some pair had zero standard error; its win probability was set to
    // 0/0.5/1 by the sign of the estimate difference.
    bool degenerate_pairs = false;
};

// Closed-form analogue of SUCRA: mean over competitors of the one-sided
// certainty P(i beats j) = Phi((theta_i - theta_j) / se_ij) under the
// orientation.  Each unordered pair is evaluated once and mirrored as
// 1 - value, so the scores average exactly 0.5.
PScoreResult p_score(const FitResult& fit,
                     const std::vector<ContrastVector>& vs_reference,
                     Orientation o);

enum class HierarchyMetric {
    PointEstimate,
    PBest,
    MedianRank,
    ExpectedRank,
    Sucra,
    PScore
};

// Larger metric first for PBest/Sucra/PScore, smaller first for rank metrics;
// PointEstimate sorts by the orientation.
bool metric_sorts_descending(HierarchyMetric m, Orientation o);

struct HierarchyRow {
    std::string label;
    double metric = 0.0;
    int position = 0;         // 1-based; exact metric ties share a position
    RelativeEffect vs_reference;
};

struct Hierarchy {
    HierarchyMetric metric = HierarchyMetric::PBest;
    Orientation orientation = Orientation::LargerBetter;
    std::vector<HierarchyRow> rows; // best first
};

Hierarchy build_hierarchy(const std::vector<std::string>& labels,
                          const std::vector<double>& metric_values,
                          const std::vector<RelativeEffect>& vs_reference,
                          HierarchyMetric metric, Orientation o);

} // namespace cnma
