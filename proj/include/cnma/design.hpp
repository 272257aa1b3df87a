#pragma once

#include "cnma/network.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cnma {

// Extra multiplicative column switched on only when a treatment contains all
// listed member components.
struct InteractionTerm {
    std::vector<std::string> members; // >= 2 catalog components
    std::string label() const;        // members joined by ':'
};

struct ModelSpec {
    std::string anchor;                      // "" = unanchored model
    std::vector<InteractionTerm> interactions;
};

// The three matrices of the additive model.  All entries are exact integers:
// `basic` holds +1/-1 arm indicators per contrast, `component` maps each
// treatment onto the additive parameters, and `design = basic * component`.
struct DesignMatrices {
    Eigen::MatrixXi basic;      // n_contrasts x n_treatments
    Eigen::MatrixXi component;  // n_treatments x n_parameters
    Eigen::MatrixXi design;     // n_contrasts x n_parameters

    std::vector<std::string> treatment_labels; // display forms, column order
    std::vector<std::string> parameter_labels;

    Eigen::MatrixXd design_d() const { return design.cast<double>(); }
};

// 0/1 (and 0 for the anchor) additive encoding of an arbitrary unit
// combination over the catalog parameters, including interaction columns.
// Throws ValidationError for unknown units and for combinations that touch a
// collapsed treatment's units without being exactly that treatment.
Eigen::VectorXi encode_combination(const TreatmentLabel& t,
                                   const ComponentCatalog& cat,
                                   const ModelSpec& spec);

DesignMatrices build_design(const Network& net, const ComponentCatalog& cat,
                            const ModelSpec& spec = {});

// Coefficient vector of the relative effect "a vs b" (enc(a) - enc(b)).
struct ContrastVector {
    Eigen::VectorXd coeffs;
    std::string description; // "a vs b" in display form
};

ContrastVector contrast_vector(const TreatmentLabel& a, const TreatmentLabel& b,
                               const ComponentCatalog& cat,
                               const ModelSpec& spec = {});

} // namespace cnma
