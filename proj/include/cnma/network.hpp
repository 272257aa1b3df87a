#pragma once

#include "cnma/errors.hpp"
#include "cnma/label.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace cnma {

// One contrast row: effect of treat1 relative to treat2 with its standard
// error, taken from study `study`.
struct Contrast {
    std::string study;
    TreatmentLabel treat1;
    TreatmentLabel treat2;
    double effect = 0.0;
    double se = 0.0;
};

// All contrast rows belonging to one study, in file order.
struct Study {
    std::string id;
    std::vector<int> rows;  // indices into Network::contrasts
    int n_arms = 2;
    std::vector<TreatmentLabel> arms; // deterministic order (sorted)
};

struct Network {
    std::vector<Contrast> contrasts;          // file order
    std::vector<Study> studies;               // order of first appearance
    std::vector<TreatmentLabel> treatments;   // sorted by (size, units)

    int treatment_index(const TreatmentLabel& t) const; // -1 if absent
};

// Groups contrasts into studies, derives the treatment list and validates the
// structural invariants: distinct arms per contrast, positive standard
// errors, and multi-arm studies reported as complete pairwise sets.
Network make_network(std::vector<Contrast> contrasts);

// Reads "studlab,treat1,treat2,TE,seTE" CSV (header required).
Network read_contrast_csv(const std::string& path);
Network read_contrast_csv(std::istream& in, const std::string& origin);

// Additive parameter catalog implied by the observed treatments:
//  - `components`: units that can be modelled additively (the closure of
//    units appearing in at least two distinct treatments under co-occurrence
//    in multi-unit treatments),
//  - `standalone`: single-unit treatments outside that closure,
//  - `collapsed`: multi-unit treatments none of whose units is a component;
//    they enter the model as a single indivisible column.
struct ComponentCatalog {
    std::vector<std::string> components;          // sorted unit labels
    std::vector<TreatmentLabel> standalone;       // sorted
    std::vector<TreatmentLabel> collapsed;        // sorted

    bool is_component(const std::string& unit) const;
    // Additive parameter labels, without interaction columns:
    // components ++ standalone ++ collapsed.
    std::vector<std::string> parameter_labels() const;
};

ComponentCatalog derive_component_catalog(const Network& net);

// Non-fatal structural findings, one human-readable line each: disconnected
// evidence, duplicated comparisons inside a study, single-study units, ...
std::vector<std::string> validate_network(const Network& net);

// Covariance of the study's contrast rows, reconstructed from the reported
// standard errors under independent arm estimates: se^2(k,l) = v_k + v_l is
// solved for the arm variances v (least squares; ValidationError if any
// v < 0), then Cov(d_kl, d_mn) follows from shared arms.  `tau2` adds a
// heterogeneity variance of tau2/2 to every arm.
Eigen::MatrixXd multiarm_covariance(const Network& net, const Study& study,
                                    double tau2 = 0.0);

} // namespace cnma
