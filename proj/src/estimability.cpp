#include "cnma/estimability.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cnma {

namespace {

double rank_cutoff(const Eigen::VectorXd& sv, int rows, int cols,
                   RankTolerance tol) {
    const double smax = sv.size() ? sv(0) : 0.0;
    return tol.relative * smax * static_cast<double>(std::max(rows, cols));
}

struct RankInfo {
    int rank = 0;
    double cutoff = 0.0;
    double smallest_kept = 0.0; // 0 when rank == 0
};

RankInfo rank_info(const Eigen::MatrixXd& A, RankTolerance tol) {
    RankInfo info;
    if (A.rows() == 0 || A.cols() == 0) return info;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const Eigen::VectorXd sv = svd.singularValues();
    info.cutoff = rank_cutoff(sv, static_cast<int>(A.rows()),
                              static_cast<int>(A.cols()), tol);
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > info.cutoff) {
            info.rank = i + 1;
            info.smallest_kept = sv(i);
        }
    return info;
}

struct Verdict {
    bool estimable = false;
    bool fragile = false;
};

Verdict verdict_for(const Eigen::MatrixXd& M, const RankInfo& base,
                    const Eigen::VectorXd& v, RankTolerance tol) {
    Eigen::MatrixXd aug(M.rows() + 1, M.cols());
    aug.topRows(M.rows()) = M;
    aug.bottomRows(1) = v.transpose();
    const RankInfo a = rank_info(aug, tol);
    Verdict out;
    out.estimable = (a.rank == base.rank);
    // Decisions resting on a singular value within a decade of the cutoff are
    // numerically precarious either way.
    out.fragile = a.rank > 0 && a.smallest_kept < 10.0 * a.cutoff;
    return out;
}

} // namespace

int numeric_rank(const Eigen::MatrixXd& A, RankTolerance tol) {
    return rank_info(A, tol).rank;
}

EstimabilityVerdict classify_estimability(const Eigen::MatrixXd& M,
                                          const Eigen::VectorXd& v,
                                          RankTolerance tol) {
    const Verdict r = verdict_for(M, rank_info(M, tol), v, tol);
    return EstimabilityVerdict{r.estimable, r.fragile};
}

bool is_estimable(const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                  RankTolerance tol) {
    return verdict_for(M, rank_info(M, tol), v, tol).estimable;
}

bool oracle_residual_estimable(const Eigen::MatrixXd& M,
                               const Eigen::VectorXd& v, RankTolerance tol) {
    // Minimum-norm least squares for M' x = v, then check the residual.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        M.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(tol.relative);
    const Eigen::VectorXd x = svd.solve(v);
    const double resid = (M.transpose() * x - v).norm();
    const double scale = std::max(1.0, v.norm());
    const double bound =
        tol.relative * static_cast<double>(std::max(M.rows(), M.cols())) * scale;
    return resid <= std::max(bound, 1e-300);
}

bool full_identifiability(const Eigen::MatrixXd& M, RankTolerance tol) {
    return numeric_rank(M, tol) == M.cols();
}

EstimabilityReport check_set(const Eigen::MatrixXd& M,
                             const std::vector<TreatmentLabel>& set,
                             const TreatmentLabel& reference,
                             const ComponentCatalog& cat,
                             const ModelSpec& spec, RankTolerance tol) {
    EstimabilityReport rep;
    rep.reference = reference.display();
    const RankInfo base = rank_info(M, tol);
    rep.rank = base.rank;
    rep.n_parameters = static_cast<int>(M.cols());
    rep.fully_identified = (base.rank == M.cols());

    for (const auto& t : set) {
        if (t == reference) continue;
        const ContrastVector cv = contrast_vector(t, reference, cat, spec);
        const Verdict v = verdict_for(M, base, cv.coeffs, tol);
        rep.verdicts.push_back(SetVerdict{t.display(), v.estimable, v.fragile});
    }
    return rep;
}

std::vector<SetVerdict> parameter_diagnostics(
    const Eigen::MatrixXd& M, const std::vector<std::string>& parameter_labels,
    RankTolerance tol) {
    std::vector<SetVerdict> out;
    const RankInfo base = rank_info(M, tol);
    for (int j = 0; j < M.cols(); ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(M.cols());
        e(j) = 1.0;
        const Verdict v = verdict_for(M, base, e, tol);
        const std::string label = j < static_cast<int>(parameter_labels.size())
                                      ? parameter_labels[j]
                                      : ("parameter " + std::to_string(j));
        out.push_back(SetVerdict{label, v.estimable, v.fragile});
    }
    return out;
}

} // namespace cnma
