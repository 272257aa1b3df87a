#include "cnma/fit.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace cnma {

Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& A, double rel) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double emax = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    const double cutoff = rel * std::max(emax, 1.0) *
                          static_cast<double>(std::max<Eigen::Index>(A.rows(), 1));
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i)) > cutoff) inv(i) = 1.0 / ev(i);
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd weight_matrix(const Network& net, double tau2) {
    const int n = static_cast<int>(net.contrasts.size());
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (const Study& st : net.studies) {
        const Eigen::MatrixXd cov = multiarm_covariance(net, st, tau2);
        const Eigen::MatrixXd w = pinv_psd(cov);
        for (std::size_t i = 0; i < st.rows.size(); ++i)
            for (std::size_t j = 0; j < st.rows.size(); ++j)
                W(st.rows[i], st.rows[j]) = w(static_cast<int>(i),
                                              static_cast<int>(j));
    }
    return W;
}

FitResult fit_common(const Eigen::MatrixXd& M, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& W, RankTolerance tol) {
    FitResult fit;
    const Eigen::MatrixXd mtw = M.transpose() * W;
    fit.cov = pinv_psd(mtw * M);
    fit.beta = fit.cov * (mtw * y);
    const Eigen::VectorXd resid = y - M * fit.beta;
    fit.Q = resid.dot(W * resid);
    fit.rank = numeric_rank(M, tol);
    fit.df = static_cast<int>(M.rows()) - fit.rank;
    fit.tau2 = 0.0;
    fit.effects = EffectsModel::Common;
    return fit;
}

double estimate_tau2(const Eigen::MatrixXd& M, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& W, const FitResult& common_fit) {
    (void)y;
    const Eigen::MatrixXd mtw = M.transpose() * W;
    const double c =
        W.trace() - (common_fit.cov * (mtw * W.transpose() * M)).trace();
    if (c <= 0.0) return 0.0;
    return std::max(0.0, (common_fit.Q - common_fit.df) / c);
}

FitResult fit_gls(const Network& net, const DesignMatrices& dm,
                  FitOptions opt) {
    const int n = static_cast<int>(net.contrasts.size());
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = net.contrasts[i].effect;
    const Eigen::MatrixXd M = dm.design_d();

    const Eigen::MatrixXd W = weight_matrix(net, 0.0);
    FitResult fit = fit_common(M, y, W, opt.rank_tol);
    fit.parameter_labels = dm.parameter_labels;

    if (opt.effects == EffectsModel::Random) {
        const double tau2 = estimate_tau2(M, y, W, fit);
        const Eigen::MatrixXd Wr = weight_matrix(net, tau2);
        FitResult rfit = fit_common(M, y, Wr, opt.rank_tol);
        // Q, df and tau2 describe heterogeneity at the common-effects stage.
        rfit.Q = fit.Q;
        rfit.df = fit.df;
        rfit.tau2 = tau2;
        rfit.effects = EffectsModel::Random;
        rfit.parameter_labels = dm.parameter_labels;
        return rfit;
    }
    return fit;
}

RelativeEffect relative_effect(const FitResult& fit, const Eigen::MatrixXd& M,
                               const ContrastVector& v, RankTolerance tol) {
    RelativeEffect out;
    out.label = v.description;
    const EstimabilityVerdict verdict = classify_estimability(M, v.coeffs, tol);
    out.estimable = verdict.estimable;
    out.fragile = verdict.fragile;
    if (!out.estimable) return out;

    out.estimate = v.coeffs.dot(fit.beta);
    const double var = v.coeffs.dot(fit.cov * v.coeffs);
    out.se = std::sqrt(std::max(var, 0.0));
    out.ci_low = out.estimate - kCiZ * out.se;
    out.ci_high = out.estimate + kCiZ * out.se;
    return out;
}

} // namespace cnma
