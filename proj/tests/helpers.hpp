#pragma once

#include "cnma/network.hpp"
#include "cnma/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace testutil {

inline std::string data_path(const std::string& name) {
    return std::string(CNMA_DATA_DIR) + "/" + name;
}

template <typename A, typename B>
inline bool same_matrix(const Eigen::MatrixBase<A>& a,
                        const Eigen::MatrixBase<B>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.array() == b.array()).all();
}

template <typename A, typename B>
inline bool same_vector(const Eigen::MatrixBase<A>& a,
                        const Eigen::MatrixBase<B>& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

// Deterministic test-local random sequence on top of the counter source.
struct TestRng {
    std::uint64_t seed;
    std::uint64_t n = 0;
    explicit TestRng(std::uint64_t s) : seed(s) {}
    double uniform() { return cnma::uniform01(seed, n++, 0); }
    double normal() { return cnma::normal_draw(seed, n++, 1); }
    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(uniform() * (hi - lo + 1));
    }
};

// Small random but structurally valid network: random unit subsets as
// treatments, two- and three-arm studies with consistent standard errors.
inline cnma::Network random_network(TestRng& rng) {
    static const std::vector<std::string> unit_pool = {"A", "B", "C",
                                                       "D", "E", "F"};
    const int n_units = rng.uniform_int(2, 6);

    std::vector<cnma::TreatmentLabel> treats;
    auto try_add = [&](const cnma::TreatmentLabel& t) {
        for (const auto& u : treats)
            if (u == t) return;
        treats.push_back(t);
    };
    const int attempts = rng.uniform_int(3, 7);
    for (int a = 0; a < attempts; ++a) {
        const int size = rng.uniform_int(1, std::min(3, n_units));
        std::vector<std::string> units;
        while (static_cast<int>(units.size()) < size) {
            const std::string& u = unit_pool[rng.uniform_int(0, n_units - 1)];
            bool dup = false;
            for (const auto& e : units) dup |= (e == u);
            if (!dup) units.push_back(u);
        }
        try_add(cnma::TreatmentLabel(units));
    }
    for (int u = 0; treats.size() < 2 && u < n_units; ++u)
        try_add(cnma::TreatmentLabel({unit_pool[u]}));

    std::vector<cnma::Contrast> rows;
    const int n_studies = rng.uniform_int(3, 9);
    for (int s = 0; s < n_studies; ++s) {
        const std::string id = "study" + std::to_string(s + 1);
        const bool three_arm =
            treats.size() >= 3 && rng.uniform() < 0.25;
        std::vector<int> arm_idx;
        const int arms = three_arm ? 3 : 2;
        while (static_cast<int>(arm_idx.size()) < arms) {
            const int i = rng.uniform_int(0, static_cast<int>(treats.size()) - 1);
            bool dup = false;
            for (int e : arm_idx) dup |= (e == i);
            if (!dup) arm_idx.push_back(i);
        }
        // Arm variances first so multi-arm rows stay mutually consistent.
        std::vector<double> v(arm_idx.size());
        for (auto& x : v) x = 0.05 + 0.45 * rng.uniform();
        for (std::size_t k = 0; k < arm_idx.size(); ++k)
            for (std::size_t l = k + 1; l < arm_idx.size(); ++l) {
                cnma::Contrast c;
                c.study = id;
                c.treat1 = treats[arm_idx[k]];
                c.treat2 = treats[arm_idx[l]];
                c.effect = rng.normal();
                c.se = std::sqrt(v[k] + v[l]);
                rows.push_back(std::move(c));
            }
    }
    return cnma::make_network(std::move(rows));
}

} // namespace testutil
