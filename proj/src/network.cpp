#include "cnma/network.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cnma {

namespace {

using detail::split_csv;
using detail::trim;

double parse_number(const std::string& s, const std::string& what,
                    const std::string& origin, int lineno) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != trim(s).size() && used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(origin + ":" + std::to_string(lineno) + ": cannot parse " +
                      what + " from '" + s + "'");
    }
}

} // namespace

int Network::treatment_index(const TreatmentLabel& t) const {
    for (std::size_t i = 0; i < treatments.size(); ++i)
        if (treatments[i] == t) return static_cast<int>(i);
    return -1;
}

Network make_network(std::vector<Contrast> contrasts) {
    if (contrasts.empty())
        throw ValidationError("network contains no contrast rows");

    Network net;
    net.contrasts = std::move(contrasts);

    std::map<std::string, int> study_pos;
    std::set<TreatmentLabel> treatment_set;
    for (std::size_t i = 0; i < net.contrasts.size(); ++i) {
        const Contrast& c = net.contrasts[i];
        if (c.study.empty())
            throw ValidationError("contrast row " + std::to_string(i + 1) +
                                  " has an empty study label");
        if (c.treat1 == c.treat2)
            throw ValidationError("study '" + c.study +
                                  "' compares a treatment with itself (" +
                                  c.treat1.display() + ")");
        if (!(c.se > 0.0) || !std::isfinite(c.se))
            throw ValidationError("study '" + c.study +
                                  "' has a non-positive standard error");
        if (!std::isfinite(c.effect))
            throw ValidationError("study '" + c.study +
                                  "' has a non-finite effect");

        auto [it, inserted] =
            study_pos.emplace(c.study, static_cast<int>(net.studies.size()));
        if (inserted) net.studies.push_back(Study{c.study, {}, 2, {}});
        net.studies[it->second].rows.push_back(static_cast<int>(i));
        treatment_set.insert(c.treat1);
        treatment_set.insert(c.treat2);
    }

    // Multi-arm studies must report the complete set of pairwise contrasts,
    // each unordered pair exactly once.
    for (Study& st : net.studies) {
        std::set<TreatmentLabel> arms;
        std::set<std::pair<std::string, std::string>> pairs;
        for (int r : st.rows) {
            const Contrast& c = net.contrasts[r];
            arms.insert(c.treat1);
            arms.insert(c.treat2);
            auto key = std::minmax(c.treat1.key(), c.treat2.key());
            if (!pairs.emplace(key.first, key.second).second)
                throw ValidationError("study '" + st.id +
                                      "' reports the comparison " +
                                      c.treat1.display() + " vs " +
                                      c.treat2.display() + " more than once");
        }
        st.arms.assign(arms.begin(), arms.end());
        st.n_arms = static_cast<int>(arms.size());
        const std::size_t expected =
            static_cast<std::size_t>(st.n_arms) * (st.n_arms - 1) / 2;
        if (st.rows.size() != expected)
            throw ValidationError(
                "study '" + st.id + "' covers " + std::to_string(st.n_arms) +
                " treatments but reports " + std::to_string(st.rows.size()) +
                " contrasts; a complete pairwise set (" +
                std::to_string(expected) + ") is required");
    }

    net.treatments.assign(treatment_set.begin(), treatment_set.end());
    return net;
}

Network read_contrast_csv(std::istream& in, const std::string& origin) {
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line))
        throw IoError(origin + ": empty file");
    ++lineno;
    const auto header = split_csv(line, origin, lineno);
    const std::vector<std::string> expected = {"studlab", "treat1", "treat2",
                                               "TE", "seTE"};
    if (header.size() != expected.size())
        throw IoError(origin + ": expected header studlab,treat1,treat2,TE,seTE");
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (trim(header[i]) != expected[i])
            throw IoError(origin + ": expected header column '" + expected[i] +
                          "', found '" + trim(header[i]) + "'");

    std::vector<Contrast> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line, origin, lineno);
        if (f.size() != 5)
            throw IoError(origin + ":" + std::to_string(lineno) +
                          ": expected 5 fields, found " +
                          std::to_string(f.size()));
        Contrast c;
        c.study = trim(f[0]);
        try {
            c.treat1 = TreatmentLabel::parse(f[1]);
            c.treat2 = TreatmentLabel::parse(f[2]);
        } catch (const ValidationError& e) {
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": " +
                                  e.what());
        }
        c.effect = parse_number(f[3], "TE", origin, lineno);
        c.se = parse_number(f[4], "seTE", origin, lineno);
        rows.push_back(std::move(c));
    }
    try {
        return make_network(std::move(rows));
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

Network read_contrast_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_contrast_csv(in, path);
}

bool ComponentCatalog::is_component(const std::string& unit) const {
    return std::binary_search(components.begin(), components.end(), unit);
}

std::vector<std::string> ComponentCatalog::parameter_labels() const {
    // Single-unit parameters (components and standalone treatments) share one
    // alphabetical axis; collapsed treatments follow.
    std::vector<std::string> out = components;
    for (const auto& t : standalone) out.push_back(t.key());
    std::sort(out.begin(), out.end());
    for (const auto& t : collapsed) out.push_back(t.key());
    return out;
}

ComponentCatalog derive_component_catalog(const Network& net) {
    // Seed: units appearing in at least two distinct treatment labels.
    std::map<std::string, std::set<std::string>> labels_of_unit;
    for (const auto& t : net.treatments)
        for (const auto& u : t.units()) labels_of_unit[u].insert(t.key());

    std::set<std::string> closure;
    for (const auto& [unit, labels] : labels_of_unit)
        if (labels.size() >= 2) closure.insert(unit);

    // Closure: a multi-unit treatment containing a closure member pulls in
    // all of its units.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& t : net.treatments) {
            if (t.size() < 2) continue;
            const bool touches =
                std::any_of(t.units().begin(), t.units().end(),
                            [&](const std::string& u) { return closure.count(u) > 0; });
            if (!touches) continue;
            for (const auto& u : t.units())
                changed |= closure.insert(u).second;
        }
    }

    ComponentCatalog cat;
    cat.components.assign(closure.begin(), closure.end());
    for (const auto& t : net.treatments) {
        const bool any_in =
            std::any_of(t.units().begin(), t.units().end(),
                        [&](const std::string& u) { return closure.count(u) > 0; });
        if (any_in) continue; // fully additive (closure is co-occurrence closed)
        if (t.size() == 1)
            cat.standalone.push_back(t);
        else
            cat.collapsed.push_back(t);
    }
    std::sort(cat.standalone.begin(), cat.standalone.end());
    std::sort(cat.collapsed.begin(), cat.collapsed.end());
    return cat;
}

std::vector<std::string> validate_network(const Network& net) {
    std::vector<std::string> findings;

    // Connectivity over observed treatments.
    const int n = static_cast<int>(net.treatments.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& c : net.contrasts) {
        const int a = net.treatment_index(c.treat1);
        const int b = net.treatment_index(c.treat2);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack = {s};
        comp[s] = n_comp;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (comp[w] < 0) {
                    comp[w] = n_comp;
                    stack.push_back(w);
                }
        }
        ++n_comp;
    }
    if (n_comp > 1) {
        std::string msg = "network is disconnected (" +
                          std::to_string(n_comp) + " islands):";
        for (int k = 0; k < n_comp; ++k) {
            msg += k ? " |" : "";
            for (int i = 0; i < n; ++i)
                if (comp[i] == k) msg += " " + net.treatments[i].display();
        }
        findings.push_back(msg);
    }

    // Treatments observed in a single study only.
    std::map<std::string, std::set<std::string>> studies_of;
    for (const auto& c : net.contrasts) {
        studies_of[c.treat1.key()].insert(c.study);
        studies_of[c.treat2.key()].insert(c.study);
    }
    for (const auto& t : net.treatments)
        if (studies_of[t.key()].size() == 1)
            findings.push_back("treatment '" + t.display() +
                               "' is observed in a single study (" +
                               *studies_of[t.key()].begin() + ")");

    // Units never observed outside combinations.
    std::set<std::string> alone, in_combo;
    for (const auto& t : net.treatments) {
        if (t.size() == 1)
            alone.insert(t.units()[0]);
        else
            in_combo.insert(t.units().begin(), t.units().end());
    }
    for (const auto& u : in_combo)
        if (!alone.count(u))
            findings.push_back("unit '" + u +
                               "' is never observed as monotherapy");

    return findings;
}

Eigen::MatrixXd multiarm_covariance(const Network& net, const Study& study,
                                    double tau2) {
    const int m = static_cast<int>(study.rows.size());
    Eigen::MatrixXd cov(m, m);
    if (m == 1) {
        const double se = net.contrasts[study.rows[0]].se;
        cov(0, 0) = se * se + tau2;
        return cov;
    }

    // Solve se^2(k,l) = v_k + v_l for the arm variances.
    const int a = study.n_arms;
    auto arm_index = [&](const TreatmentLabel& t) {
        const auto it = std::lower_bound(study.arms.begin(), study.arms.end(), t);
        return static_cast<int>(it - study.arms.begin());
    };
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, a);
    Eigen::VectorXd s2(m);
    std::vector<std::pair<int, int>> pair_of(m);
    for (int r = 0; r < m; ++r) {
        const Contrast& c = net.contrasts[study.rows[r]];
        const int k = arm_index(c.treat1);
        const int l = arm_index(c.treat2);
        A(r, k) = 1.0;
        A(r, l) = 1.0;
        s2(r) = c.se * c.se;
        pair_of[r] = {k, l};
    }
    Eigen::VectorXd v = A.colPivHouseholderQr().solve(s2);
    for (int i = 0; i < a; ++i) {
        if (v(i) < -1e-12)
            throw ValidationError(
                "study '" + study.id + "': reported standard errors imply a " +
                "negative variance for arm '" + study.arms[i].display() +
                "' (" + std::to_string(v(i)) + ")");
        v(i) = std::max(v(i), 0.0) + tau2 / 2.0;
    }

    // Cov(x_k - x_l, x_m - x_n) from shared arms.
    for (int r = 0; r < m; ++r) {
        const auto [k, l] = pair_of[r];
        for (int c = 0; c < m; ++c) {
            const auto [mm, nn] = pair_of[c];
            double val = 0.0;
            if (k == mm) val += v(k);
            if (k == nn) val -= v(k);
            if (l == mm) val -= v(l);
            if (l == nn) val += v(l);
            cov(r, c) = val;
        }
    }
    return cov;
}

} // namespace cnma
