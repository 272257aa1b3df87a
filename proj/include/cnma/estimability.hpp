#pragma once

#include "cnma/design.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cnma {

struct RankTolerance {
    // Singular values below relative * sigma_max * max(rows, cols) count as
    // zero.
    double relative = 1e-8;
};

// Number of singular values above the relative cutoff.
int numeric_rank(const Eigen::MatrixXd& A, RankTolerance tol = {});

// A linear combination v'beta is estimable iff v lies in the row space of the
// design matrix, i.e. appending v as an extra row does not raise the rank.
bool is_estimable(const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                  RankTolerance tol = {});

// Independent route to the same question: the minimum-norm least-squares
// solution x* of M' x = v reproduces v exactly iff v is in the row space.
// Checks |M' x* - v| / max(1, |v|) against the relative cutoff.
bool oracle_residual_estimable(const Eigen::MatrixXd& M,
                               const Eigen::VectorXd& v,
                               RankTolerance tol = {});

// rank(M) == number of parameters: every linear combination is estimable.
bool full_identifiability(const Eigen::MatrixXd& M, RankTolerance tol = {});

struct SetVerdict {
    std::string label;
    bool estimable = false;
    // The verdict relies on a singular value within 10x of the rank cutoff;
    // treat it as numerically fragile.
    bool fragile = false;
};

struct EstimabilityVerdict {
    bool estimable = false;
    bool fragile = false;
};

// Single-contrast rank comparison with the fragility diagnostic.
EstimabilityVerdict classify_estimability(const Eigen::MatrixXd& M,
                                          const Eigen::VectorXd& v,
                                          RankTolerance tol = {});

struct EstimabilityReport {
    std::string reference;
    int rank = 0;
    int n_parameters = 0;
    bool fully_identified = false;
    std::vector<SetVerdict> verdicts; // one per non-reference element
};

// Estimability of every element of `set` relative to `reference`.
EstimabilityReport check_set(const Eigen::MatrixXd& M,
                             const std::vector<TreatmentLabel>& set,
                             const TreatmentLabel& reference,
                             const ComponentCatalog& cat,
                             const ModelSpec& spec = {},
                             RankTolerance tol = {});

// Estimability of each single parameter column (unit coefficient vectors);
// pinpoints which additive effects the data cannot identify.
std::vector<SetVerdict> parameter_diagnostics(const Eigen::MatrixXd& M,
                                              const std::vector<std::string>& parameter_labels,
                                              RankTolerance tol = {});

} // namespace cnma
