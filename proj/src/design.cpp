#include "cnma/design.hpp"

#include <algorithm>

namespace cnma {

std::string InteractionTerm::label() const {
    std::string out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) out += ':';
        out += members[i];
    }
    return out;
}

namespace {

std::vector<std::string> all_parameter_labels(const ComponentCatalog& cat,
                                              const ModelSpec& spec) {
    std::vector<std::string> labels = cat.parameter_labels();
    for (const auto& term : spec.interactions) labels.push_back(term.label());
    return labels;
}

void validate_spec(const ComponentCatalog& cat, const ModelSpec& spec) {
    for (const auto& term : spec.interactions) {
        if (term.members.size() < 2)
            throw ValidationError("interaction terms need at least two members");
        std::vector<std::string> sorted = term.members;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ValidationError("interaction '" + term.label() +
                                  "' lists a member twice");
        for (const auto& m : term.members)
            if (!cat.is_component(m))
                throw ValidationError("interaction member '" + m +
                                      "' is not a component of the network");
    }
    if (!spec.anchor.empty()) {
        const auto labels = all_parameter_labels(cat, spec);
        if (std::find(labels.begin(), labels.end(), spec.anchor) == labels.end())
            throw ValidationError("unknown parameter '" + spec.anchor +
                                  "' used as anchor");
    }
}

} // namespace

Eigen::VectorXi encode_combination(const TreatmentLabel& t,
                                   const ComponentCatalog& cat,
                                   const ModelSpec& spec) {
    validate_spec(cat, spec);

    const std::vector<std::string> labels = all_parameter_labels(cat, spec);
    const int p = static_cast<int>(labels.size());
    const int n_base = p - static_cast<int>(spec.interactions.size());
    auto index_of = [&](const std::string& label) {
        const auto it = std::find(labels.begin(), labels.end(), label);
        return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
    };

    Eigen::VectorXi enc = Eigen::VectorXi::Zero(p);

    // Collapsed treatments enter as one indivisible column.
    bool is_collapsed = false;
    for (const auto& coll : cat.collapsed) {
        if (t == coll) {
            enc(index_of(coll.key())) = 1;
            is_collapsed = true;
            break;
        }
    }

    if (!is_collapsed) {
        for (const auto& u : t.units()) {
            if (cat.is_component(u)) {
                enc(index_of(u)) = 1;
                continue;
            }
            bool standalone = false;
            for (const auto& st : cat.standalone) standalone |= (st.key() == u);
            if (standalone) {
                if (t.size() > 1)
                    throw ValidationError("standalone treatment '" + u +
                                          "' cannot be combined additively "
                                          "with other units");
                enc(index_of(u)) = 1;
                continue;
            }
            for (const auto& coll : cat.collapsed)
                if (coll.contains(u))
                    throw ValidationError(
                        "unit '" + u + "' belongs to the collapsed treatment '" +
                        coll.display() +
                        "', which cannot be combined additively");
            throw ValidationError("unknown unit '" + u +
                                  "' (not a component, standalone or collapsed "
                                  "treatment of the network)");
        }
        for (std::size_t k = 0; k < spec.interactions.size(); ++k)
            if (t.contains_all(spec.interactions[k].members))
                enc(n_base + static_cast<int>(k)) = 1;
    }

    // Anchoring fixes one parameter at zero by blanking its column.
    if (!spec.anchor.empty()) enc(index_of(spec.anchor)) = 0;

    return enc;
}

DesignMatrices build_design(const Network& net, const ComponentCatalog& cat,
                            const ModelSpec& spec) {
    validate_spec(cat, spec);

    DesignMatrices dm;
    const int n = static_cast<int>(net.contrasts.size());
    const int t = static_cast<int>(net.treatments.size());

    dm.basic = Eigen::MatrixXi::Zero(n, t);
    for (int r = 0; r < n; ++r) {
        dm.basic(r, net.treatment_index(net.contrasts[r].treat1)) = 1;
        dm.basic(r, net.treatment_index(net.contrasts[r].treat2)) = -1;
    }

    dm.parameter_labels = all_parameter_labels(cat, spec);
    const int p = static_cast<int>(dm.parameter_labels.size());
    dm.component = Eigen::MatrixXi::Zero(t, p);
    for (int i = 0; i < t; ++i)
        dm.component.row(i) =
            encode_combination(net.treatments[i], cat, spec).transpose();

    dm.design = dm.basic * dm.component;

    dm.treatment_labels.reserve(t);
    for (const auto& tl : net.treatments)
        dm.treatment_labels.push_back(tl.display());
    return dm;
}

ContrastVector contrast_vector(const TreatmentLabel& a, const TreatmentLabel& b,
                               const ComponentCatalog& cat,
                               const ModelSpec& spec) {
    ContrastVector v;
    v.coeffs = (encode_combination(a, cat, spec) - encode_combination(b, cat, spec))
                   .cast<double>();
    v.description = a.display() + " vs " + b.display();
    return v;
}

} // namespace cnma
