#pragma once

#include "cnma/design.hpp"
#include "cnma/estimability.hpp"
#include "cnma/network.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cnma {

enum class EffectsModel { Common, Random };

struct FitOptions {
    EffectsModel effects = EffectsModel::Common;
    RankTolerance rank_tol{};
};

struct FitResult {
    Eigen::VectorXd beta;    // minimum-norm GLS solution
    Eigen::MatrixXd cov;     // (M' W M)^+
    double Q = 0.0;          // heterogeneity statistic (common-effects stage)
    int df = 0;              // n_contrasts - rank
    double tau2 = 0.0;       // DerSimonian-Laird estimate (0 under Common)
    int rank = 0;
    EffectsModel effects = EffectsModel::Common;
    std::vector<std::string> parameter_labels;
};

// Moore-Penrose pseudoinverse via eigendecomposition (symmetric input) with
// relative eigenvalue cutoff.
Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& A, double rel = 1e-12);

// Block-diagonal weight matrix: per study the pseudoinverse of the
// reconstructed contrast covariance (arm variances inflated by tau2/2).
Eigen::MatrixXd weight_matrix(const Network& net, double tau2 = 0.0);

// Generalized least squares with the given weights; fills beta/cov/Q/df/rank.
FitResult fit_common(const Eigen::MatrixXd& M, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& W, RankTolerance tol = {});

// DerSimonian-Laird moment estimate max(0, (Q - df) / c) with
// c = tr(W) - tr((M'WM)^+ M'W^2 M), computed at the common-effects weights.
double estimate_tau2(const Eigen::MatrixXd& M, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& W, const FitResult& common_fit);

// Full pipeline on a network: common fit, and for Random a refit with
// tau2-inflated weights (Q/df stay those of the common stage).
FitResult fit_gls(const Network& net, const DesignMatrices& dm,
                  FitOptions opt = {});

struct RelativeEffect {
    std::string label;        // "a vs b"
    bool estimable = false;
    bool fragile = false;
    double estimate = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// 95% two-sided normal quantile used for all intervals.
inline constexpr double kCiZ = 1.959963984540054;

// v'beta with se sqrt(v' cov v) and 95% CI; estimable/fragile flags from the
// design matrix row space.  Point values are meaningless (and zeroed) when
// not estimable.
RelativeEffect relative_effect(const FitResult& fit, const Eigen::MatrixXd& M,
                               const ContrastVector& v, RankTolerance tol = {});

} // namespace cnma
