#include "cnma/report.hpp"

#include "csv.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace cnma {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string metric_to_string(HierarchyMetric m) {
    switch (m) {
        case HierarchyMetric::PointEstimate: return "point-estimate";
        case HierarchyMetric::PBest: return "p-best";
        case HierarchyMetric::MedianRank: return "median-rank";
        case HierarchyMetric::ExpectedRank: return "expected-rank";
        case HierarchyMetric::Sucra: return "sucra";
        case HierarchyMetric::PScore: return "p-score";
    }
    return "p-best";
}

HierarchyMetric metric_from_string(const std::string& s) {
    if (s == "point-estimate") return HierarchyMetric::PointEstimate;
    if (s == "p-best") return HierarchyMetric::PBest;
    if (s == "median-rank") return HierarchyMetric::MedianRank;
    if (s == "expected-rank") return HierarchyMetric::ExpectedRank;
    if (s == "sucra") return HierarchyMetric::Sucra;
    if (s == "p-score") return HierarchyMetric::PScore;
    throw ValidationError("unknown metric '" + s + "'");
}

std::string mode_to_string(SampleMode m) {
    return m == SampleMode::Joint ? "joint" : "independent";
}

std::string orientation_to_string(Orientation o) {
    return o == Orientation::LargerBetter ? "larger-better" : "smaller-better";
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

bool metric_needs_samples(HierarchyMetric m) {
    switch (m) {
        case HierarchyMetric::PBest:
        case HierarchyMetric::MedianRank:
        case HierarchyMetric::ExpectedRank:
        case HierarchyMetric::Sucra:
            return true;
        default:
            return false;
    }
}

} // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");

    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("config '" + path + "': " + e.what());
    }

    RunConfig cfg;
    try {
        if (!j.contains("data") || !j["data"].is_string())
            throw ValidationError("config needs a string field 'data'");
        cfg.data = j["data"].get<std::string>();

        const json model = j.value("model", json::object());
        const std::string effects = model.value("effects", "common");
        if (effects == "common")
            cfg.effects = EffectsModel::Common;
        else if (effects == "random")
            cfg.effects = EffectsModel::Random;
        else
            throw ValidationError("model.effects must be 'common' or 'random'");
        cfg.anchor = model.value("anchor", "");
        for (const auto& term : model.value("interactions", json::array())) {
            InteractionTerm t;
            if (!term.is_array())
                throw ValidationError(
                    "model.interactions must be an array of string arrays");
            for (const auto& m : term) t.members.push_back(m.get<std::string>());
            cfg.interactions.push_back(std::move(t));
        }

        if (!j.contains("question") || !j["question"].is_object())
            throw ValidationError("config needs an object field 'question'");
        const json q = j["question"];
        if (q.contains("set") && q["set"].is_string()) {
            const std::string s = q["set"].get<std::string>();
            if (s == "all-treatments")
                cfg.question.selector = SetSelector::AllTreatments;
            else if (s == "all-components")
                cfg.question.selector = SetSelector::AllComponents;
            else
                throw ValidationError("question.set must be 'all-treatments', "
                                      "'all-components' or a label array");
        } else if (q.contains("set")) {
            cfg.question.selector = SetSelector::Explicit;
            for (const auto& s : q["set"])
                cfg.question.set.push_back(s.get<std::string>());
            if (cfg.question.set.empty())
                throw ValidationError("question.set must not be empty");
        }
        if (!q.contains("reference") || !q["reference"].is_string())
            throw ValidationError("question.reference is required");
        cfg.question.reference = q["reference"].get<std::string>();
        cfg.question.metric = metric_from_string(q.value("metric", "p-best"));
        const std::string orient = q.value("orientation", "larger-better");
        if (orient == "larger-better")
            cfg.question.orientation = Orientation::LargerBetter;
        else if (orient == "smaller-better")
            cfg.question.orientation = Orientation::SmallerBetter;
        else
            throw ValidationError(
                "question.orientation must be 'larger-better' or "
                "'smaller-better'");
        cfg.question.samples = q.value("samples", 1000);
        if (cfg.question.samples < 1)
            throw ValidationError("question.samples must be positive");
        cfg.question.seed = q.value("seed", std::uint64_t{1});
        const std::string mode = q.value("mode", "joint");
        if (mode == "joint")
            cfg.question.mode = SampleMode::Joint;
        else if (mode == "independent")
            cfg.question.mode = SampleMode::Independent;
        else
            throw ValidationError(
                "question.mode must be 'joint' or 'independent'");

        const json out = j.value("output", json::object());
        cfg.out_dir = out.value("dir", "out");
        if (out.contains("formats")) {
            cfg.formats.clear();
            for (const auto& f : out["formats"]) {
                const std::string name = f.get<std::string>();
                if (name != "json" && name != "csv" && name != "svg")
                    throw ValidationError("unknown output format '" + name + "'");
                cfg.formats.insert(name);
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError("config '" + path + "': " + e.what());
    }

    // Relative paths are resolved against the config file's directory.
    const fs::path base = fs::path(path).parent_path();
    if (!cfg.data.empty() && fs::path(cfg.data).is_relative())
        cfg.data = (base / cfg.data).lexically_normal().string();
    if (fs::path(cfg.out_dir).is_relative())
        cfg.out_dir = (base / cfg.out_dir).lexically_normal().string();
    return cfg;
}

namespace {

struct Prepared {
    Network net;
    ComponentCatalog cat;
    ModelSpec spec;
    DesignMatrices dm;
};

Prepared prepare(const RunConfig& cfg) {
    Prepared p;
    p.net = read_contrast_csv(cfg.data);
    p.cat = derive_component_catalog(p.net);
    p.spec.anchor = cfg.anchor;
    p.spec.interactions = cfg.interactions;
    p.dm = build_design(p.net, p.cat, p.spec);
    return p;
}

std::vector<TreatmentLabel> resolve_set(const RunConfig& cfg, const Prepared& p) {
    std::vector<TreatmentLabel> set;
    switch (cfg.question.selector) {
        case SetSelector::AllTreatments:
            set = p.net.treatments;
            break;
        case SetSelector::AllComponents:
            for (const auto& c : p.cat.components)
                set.push_back(TreatmentLabel({std::vector<std::string>{c}}));
            break;
        case SetSelector::Explicit:
            for (const auto& s : cfg.question.set)
                set.push_back(TreatmentLabel::parse(s));
            break;
    }
    if (set.empty())
        throw ValidationError("the question set resolved to no elements");
    return set;
}

RunConfig with_overrides(RunConfig cfg) {
    if (cfg.seed_override) cfg.question.seed = *cfg.seed_override;
    if (cfg.out_override) cfg.out_dir = *cfg.out_override;
    return cfg;
}

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + cfg.out_dir + "': " +
                      ec.message());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const EstimabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEstimability;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

json effect_json(const RelativeEffect& e) {
    json out;
    out["label"] = e.label;
    out["estimable"] = e.estimable;
    if (e.estimable) {
        out["estimate"] = e.estimate;
        out["se"] = e.se;
        out["ci"] = {e.ci_low, e.ci_high};
        if (e.fragile) out["fragile"] = true;
    }
    return out;
}

void print_findings(const Network& net) {
    for (const auto& f : validate_network(net)) std::cout << "note: " << f << "\n";
}

struct RankArtifacts {
    HierarchyReport report;
    std::string hierarchy_json_text;
    std::string forest_svg_text;
    EffectSamples samples; // empty draws when the metric is closed-form
    bool have_samples = false;
};

RankArtifacts run_ranking(const RunConfig& cfg, const Prepared& p,
                          const FitResult& fit) {
    const Eigen::MatrixXd M = p.dm.design_d();
    std::vector<TreatmentLabel> set = resolve_set(cfg, p);
    const TreatmentLabel reference = TreatmentLabel::parse(cfg.question.reference);

    // The reference must be part of the set.
    int ref_pos = -1;
    for (std::size_t i = 0; i < set.size(); ++i)
        if (set[i] == reference) ref_pos = static_cast<int>(i);
    if (ref_pos < 0)
        throw ValidationError("reference '" + reference.display() +
                              "' is not a member of the question set");

    // Classify every element against the reference; drop or refuse.
    RankArtifacts art;
    std::vector<TreatmentLabel> kept;
    std::vector<ContrastVector> contrasts;
    std::vector<std::string> labels;
    std::vector<std::string> refused;
    for (std::size_t i = 0; i < set.size(); ++i) {
        ContrastVector cv = contrast_vector(set[i], reference, p.cat, p.spec);
        if (static_cast<int>(i) == ref_pos) {
            kept.push_back(set[i]);
            contrasts.push_back(std::move(cv));
            labels.push_back(set[i].display());
            continue;
        }
        if (classify_estimability(M, cv.coeffs).estimable) {
            kept.push_back(set[i]);
            contrasts.push_back(std::move(cv));
            labels.push_back(set[i].display());
        } else {
            art.report.exclusions.emplace_back(
                set[i].display(),
                "not estimable vs " + reference.display());
            refused.push_back(set[i].display());
        }
    }
    if (!refused.empty() && !cfg.exclude_inestimable) {
        std::string msg = "the following elements are not estimable vs " +
                          reference.display() + ":";
        for (const auto& r : refused) msg += " '" + r + "'";
        msg += " (pass --exclude-inestimable to drop them)";
        throw EstimabilityError(msg);
    }

    int ref_idx = 0;
    for (std::size_t i = 0; i < kept.size(); ++i)
        if (kept[i] == reference) ref_idx = static_cast<int>(i);

    const int k = static_cast<int>(kept.size());
    std::vector<double> metric_values(k, 0.0);
    const HierarchyMetric metric = cfg.question.metric;

    if (metric_needs_samples(metric) || cfg.samples_file) {
        if (cfg.samples_file) {
            art.samples = read_samples_csv(*cfg.samples_file, labels,
                                           reference.display());
        } else if (metric_needs_samples(metric)) {
            art.samples = sample_effects(fit, contrasts, labels, ref_idx,
                                         cfg.question.samples,
                                         cfg.question.seed, cfg.question.mode);
        }
        art.have_samples = art.samples.draws.size() > 0;
    }

    switch (metric) {
        case HierarchyMetric::PointEstimate:
            for (int i = 0; i < k; ++i)
                metric_values[i] = contrasts[i].coeffs.dot(fit.beta);
            break;
        case HierarchyMetric::PBest:
            metric_values = p_best(art.samples, cfg.question.orientation);
            break;
        case HierarchyMetric::MedianRank: {
            const Eigen::MatrixXi ranks =
                sample_ranks(art.samples, cfg.question.orientation);
            metric_values = median_rank(ranks);
            break;
        }
        case HierarchyMetric::ExpectedRank: {
            const Eigen::MatrixXi ranks =
                sample_ranks(art.samples, cfg.question.orientation);
            metric_values = expected_rank(ranks);
            break;
        }
        case HierarchyMetric::Sucra: {
            const Eigen::MatrixXi ranks =
                sample_ranks(art.samples, cfg.question.orientation);
            metric_values = sucra(expected_rank(ranks));
            break;
        }
        case HierarchyMetric::PScore: {
            const PScoreResult ps =
                p_score(fit, contrasts, cfg.question.orientation);
            metric_values = ps.scores;
            if (ps.degenerate_pairs)
                std::cout << "note: some pairs had zero standard error; their "
                             "win probabilities were set by the sign of the "
                             "difference\n";
            break;
        }
    }

    std::vector<RelativeEffect> effects(k);
    for (int i = 0; i < k; ++i)
        effects[i] = relative_effect(fit, M, contrasts[i]);

    Hierarchy h = build_hierarchy(labels, metric_values, effects, metric,
                                  cfg.question.orientation);

    art.report.question = metric_to_string(metric) + " over " +
                          std::to_string(k) + " elements vs " +
                          reference.display();
    art.report.hierarchy = std::move(h);
    art.report.seed = cfg.question.seed;
    art.report.n_samples =
        art.have_samples ? static_cast<int>(art.samples.draws.rows()) : 0;
    art.report.mode = cfg.question.mode;
    art.report.external_samples = art.have_samples && art.samples.external;

    art.hierarchy_json_text = hierarchy_json(art.report);
    art.forest_svg_text = forest_svg(art.report.hierarchy, art.report.question);
    return art;
}

void print_hierarchy(const HierarchyReport& rep) {
    std::cout << "hierarchy: " << rep.question << "\n";
    for (const auto& row : rep.hierarchy.rows) {
        std::cout << "  " << row.position << ". " << row.label << "  metric="
                  << fmt(row.metric, "%.4f");
        const RelativeEffect& e = row.vs_reference;
        if (e.estimable) {
            std::cout << "  effect=" << fmt(e.estimate, "%.4f") << " ["
                      << fmt(e.ci_low, "%.4f") << ", " << fmt(e.ci_high, "%.4f")
                      << "]";
            if (e.fragile) std::cout << " (fragile)";
        } else {
            std::cout << "  (reference or not estimable)";
        }
        std::cout << "\n";
    }
    for (const auto& [label, reason] : rep.exclusions)
        std::cout << "  excluded: " << label << " (" << reason << ")\n";
}

} // namespace

std::string fit_json(const FitResult& fit, const DesignMatrices& dm) {
    json j;
    j["effects"] = fit.effects == EffectsModel::Common ? "common" : "random";
    j["parameters"] = fit.parameter_labels;
    j["estimates"] = std::vector<double>(fit.beta.data(),
                                         fit.beta.data() + fit.beta.size());
    std::vector<double> se;
    for (int i = 0; i < fit.cov.rows(); ++i)
        se.push_back(std::sqrt(std::max(fit.cov(i, i), 0.0)));
    j["se"] = se;
    json cov = json::array();
    for (int i = 0; i < fit.cov.rows(); ++i) {
        json row = json::array();
        for (int c = 0; c < fit.cov.cols(); ++c) row.push_back(fit.cov(i, c));
        cov.push_back(std::move(row));
    }
    j["cov"] = std::move(cov);
    j["rank"] = fit.rank;
    j["n_parameters"] = static_cast<int>(dm.design.cols());
    j["n_contrasts"] = static_cast<int>(dm.design.rows());
    j["Q"] = fit.Q;
    j["df"] = fit.df;
    j["tau2"] = fit.tau2;
    return j.dump(2) + "\n";
}

std::string check_json(const EstimabilityReport& rep,
                       const std::vector<SetVerdict>& parameter_verdicts) {
    json j;
    j["reference"] = rep.reference;
    j["rank"] = rep.rank;
    j["n_parameters"] = rep.n_parameters;
    j["fully_identified"] = rep.fully_identified;
    json set = json::array();
    for (const auto& v : rep.verdicts)
        set.push_back({{"label", v.label},
                       {"estimable", v.estimable},
                       {"fragile", v.fragile}});
    j["set"] = std::move(set);
    json params = json::array();
    for (const auto& v : parameter_verdicts)
        params.push_back({{"label", v.label},
                          {"estimable", v.estimable},
                          {"fragile", v.fragile}});
    j["parameters"] = std::move(params);
    return j.dump(2) + "\n";
}

std::string hierarchy_json(const HierarchyReport& rep) {
    json j;
    j["question"] = rep.question;
    j["metric"] = metric_to_string(rep.hierarchy.metric);
    j["orientation"] = orientation_to_string(rep.hierarchy.orientation);
    json elements = json::array();
    for (const auto& row : rep.hierarchy.rows) {
        json e = effect_json(row.vs_reference);
        e["metric"] = row.metric;
        e["position"] = row.position;
        e["label"] = row.label;
        elements.push_back(std::move(e));
    }
    j["elements"] = std::move(elements);
    json ex = json::array();
    for (const auto& [label, reason] : rep.exclusions)
        ex.push_back({{"label", label}, {"reason", reason}});
    j["exclusions"] = std::move(ex);
    j["seed"] = rep.seed;
    j["n_samples"] = rep.n_samples;
    j["mode"] = mode_to_string(rep.mode);
    j["external_samples"] = rep.external_samples;
    return j.dump(2) + "\n";
}

std::string design_csv(const DesignMatrices& dm) {
    std::ostringstream out;
    out << "contrast";
    for (const auto& p : dm.parameter_labels) out << ',' << detail::csv_field(p);
    out << '\n';
    for (int r = 0; r < dm.design.rows(); ++r) {
        out << "row" << (r + 1);
        for (int c = 0; c < dm.design.cols(); ++c) out << ',' << dm.design(r, c);
        out << '\n';
    }
    return out.str();
}

std::string forest_svg(const Hierarchy& h, const std::string& title) {
    const int label_w = 240, plot_w = 320, metric_w = 120;
    const int row_h = 22, top = 48, bottom = 36;
    const int width = label_w + plot_w + metric_w + 20;
    const int n = static_cast<int>(h.rows.size());
    const int height = top + n * row_h + bottom;

    // Plot range over the finite interval ends plus zero.
    double lo = 0.0, hi = 0.0;
    for (const auto& row : h.rows) {
        if (!row.vs_reference.estimable) continue;
        lo = std::min(lo, row.vs_reference.ci_low);
        hi = std::max(hi, row.vs_reference.ci_high);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const auto x_of = [&](double v) {
        return label_w + (v - lo) / (hi - lo) * plot_w;
    };
    const auto px = [&](double v) { return fmt(v, "%.2f"); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
    s << "<style>text{font-family:monospace;font-size:12px;fill:#222}"
         ".t{font-size:13px;font-weight:bold}.m{text-anchor:end}</style>\n";
    s << "<text class=\"t\" x=\"12\" y=\"20\">" << title << "</text>\n";

    // Zero line and axis.
    s << "<line x1=\"" << px(x_of(0.0)) << "\" y1=\"" << top - 8 << "\" x2=\""
      << px(x_of(0.0)) << "\" y2=\"" << top + n * row_h + 4
      << "\" stroke=\"#999\" stroke-dasharray=\"3,3\"/>\n";
    const int axis_y = top + n * row_h + 12;
    s << "<line x1=\"" << label_w << "\" y1=\"" << axis_y << "\" x2=\""
      << label_w + plot_w << "\" y2=\"" << axis_y << "\" stroke=\"#222\"/>\n";
    for (const double t : {lo + pad, 0.0, hi - pad}) {
        s << "<line x1=\"" << px(x_of(t)) << "\" y1=\"" << axis_y << "\" x2=\""
          << px(x_of(t)) << "\" y2=\"" << axis_y + 4
          << "\" stroke=\"#222\"/>\n";
        s << "<text x=\"" << px(x_of(t)) << "\" y=\"" << axis_y + 16
          << "\" text-anchor=\"middle\">" << fmt(t, "%.3g") << "</text>\n";
    }

    for (int i = 0; i < n; ++i) {
        const HierarchyRow& row = h.rows[i];
        const int cy = top + i * row_h + row_h / 2;
        s << "<text x=\"12\" y=\"" << cy + 4 << "\">" << row.position << ". "
          << row.label << "</text>\n";
        const RelativeEffect& e = row.vs_reference;
        if (e.estimable && e.se > 0.0) {
            s << "<line x1=\"" << px(x_of(e.ci_low)) << "\" y1=\"" << cy
              << "\" x2=\"" << px(x_of(e.ci_high)) << "\" y2=\"" << cy
              << "\" stroke=\"#224488\" stroke-width=\"1.5\"/>\n";
            s << "<rect x=\"" << px(x_of(e.estimate) - 3.0) << "\" y=\""
              << cy - 3 << "\" width=\"6\" height=\"6\" fill=\"#224488\"/>\n";
        } else if (e.estimable) {
            s << "<rect x=\"" << px(x_of(e.estimate) - 3.0) << "\" y=\""
              << cy - 3 << "\" width=\"6\" height=\"6\" fill=\"#888\"/>\n";
        } else {
            s << "<text x=\"" << label_w + 4 << "\" y=\"" << cy + 4
              << "\" fill=\"#a33\">not estimable</text>\n";
        }
        s << "<text class=\"m\" x=\"" << width - 12 << "\" y=\"" << cy + 4
          << "\">" << fmt(row.metric, "%.4f") << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

int cmd_fit(const RunConfig& raw_cfg) {
    return guarded([&]() {
        const RunConfig cfg = with_overrides(raw_cfg);
        const Prepared p = prepare(cfg);
        print_findings(p.net);
        const FitResult fit = fit_gls(p.net, p.dm, FitOptions{cfg.effects});

        std::cout << "fit: " << p.net.studies.size() << " studies, "
                  << p.net.contrasts.size() << " contrasts, "
                  << p.net.treatments.size() << " treatments, "
                  << p.dm.design.cols() << " parameters\n";
        std::cout << "rank(design) = " << fit.rank
                  << (fit.rank == p.dm.design.cols() ? " (fully identified)"
                                                     : " (rank deficient)")
                  << "\n";
        std::cout << "Q = " << fmt(fit.Q, "%.4f") << " on df = " << fit.df
                  << ", tau2 = " << fmt(fit.tau2, "%.6f") << "\n";
        for (std::size_t i = 0; i < fit.parameter_labels.size(); ++i)
            std::cout << "  " << fit.parameter_labels[i] << " = "
                      << fmt(fit.beta(static_cast<int>(i)), "%.4f") << " (se "
                      << fmt(std::sqrt(std::max(
                                 fit.cov(static_cast<int>(i),
                                         static_cast<int>(i)),
                                 0.0)),
                             "%.4f")
                      << ")\n";

        ensure_out_dir(cfg);
        if (cfg.formats.count("json"))
            write_text(cfg.out_dir + "/fit.json", fit_json(fit, p.dm));
        if (cfg.formats.count("csv"))
            write_text(cfg.out_dir + "/design.csv", design_csv(p.dm));
        return kExitOk;
    });
}

int cmd_check(const RunConfig& raw_cfg) {
    return guarded([&]() {
        const RunConfig cfg = with_overrides(raw_cfg);
        const Prepared p = prepare(cfg);
        print_findings(p.net);
        const Eigen::MatrixXd M = p.dm.design_d();

        const std::vector<TreatmentLabel> set = resolve_set(cfg, p);
        const TreatmentLabel reference =
            TreatmentLabel::parse(cfg.question.reference);
        const EstimabilityReport rep =
            check_set(M, set, reference, p.cat, p.spec);
        const std::vector<SetVerdict> params =
            parameter_diagnostics(M, p.dm.parameter_labels);

        std::cout << "check: rank " << rep.rank << " of " << rep.n_parameters
                  << " parameters"
                  << (rep.fully_identified ? " (fully identified)" : "")
                  << "\n";
        for (const auto& v : rep.verdicts)
            std::cout << "  " << v.label << " vs " << rep.reference << ": "
                      << (v.estimable ? "estimable" : "NOT estimable")
                      << (v.fragile ? " (fragile)" : "") << "\n";
        if (!rep.fully_identified) {
            std::cout << "inestimable parameters:";
            bool any = false;
            for (const auto& v : params)
                if (!v.estimable) {
                    std::cout << " " << v.label;
                    any = true;
                }
            if (!any) std::cout << " (none)";
            std::cout << "\n";
        }

        ensure_out_dir(cfg);
        if (cfg.formats.count("json"))
            write_text(cfg.out_dir + "/check.json", check_json(rep, params));
        return kExitOk;
    });
}

int cmd_rank(const RunConfig& raw_cfg) {
    return guarded([&]() {
        const RunConfig cfg = with_overrides(raw_cfg);
        const Prepared p = prepare(cfg);
        print_findings(p.net);
        const FitResult fit = fit_gls(p.net, p.dm, FitOptions{cfg.effects});
        RankArtifacts art = run_ranking(cfg, p, fit);
        print_hierarchy(art.report);

        ensure_out_dir(cfg);
        if (cfg.formats.count("json"))
            write_text(cfg.out_dir + "/hierarchy.json", art.hierarchy_json_text);
        if (cfg.formats.count("svg"))
            write_text(cfg.out_dir + "/forest.svg", art.forest_svg_text);
        if (cfg.formats.count("csv") && art.have_samples)
            write_samples_csv(cfg.out_dir + "/samples.csv", art.samples);
        return kExitOk;
    });
}

int cmd_report(const RunConfig& raw_cfg) {
    return guarded([&]() {
        const RunConfig cfg = with_overrides(raw_cfg);
        const Prepared p = prepare(cfg);
        print_findings(p.net);
        const FitResult fit = fit_gls(p.net, p.dm, FitOptions{cfg.effects});

        std::cout << "fit: rank " << fit.rank << " of " << p.dm.design.cols()
                  << " parameters, Q = " << fmt(fit.Q, "%.4f")
                  << " on df = " << fit.df << ", tau2 = "
                  << fmt(fit.tau2, "%.6f") << "\n";

        const std::vector<TreatmentLabel> set = resolve_set(cfg, p);
        const TreatmentLabel reference =
            TreatmentLabel::parse(cfg.question.reference);
        const Eigen::MatrixXd M = p.dm.design_d();
        const EstimabilityReport rep =
            check_set(M, set, reference, p.cat, p.spec);
        const std::vector<SetVerdict> params =
            parameter_diagnostics(M, p.dm.parameter_labels);

        RankArtifacts art = run_ranking(cfg, p, fit);
        print_hierarchy(art.report);

        ensure_out_dir(cfg);
        if (cfg.formats.count("json")) {
            write_text(cfg.out_dir + "/fit.json", fit_json(fit, p.dm));
            write_text(cfg.out_dir + "/check.json", check_json(rep, params));
            write_text(cfg.out_dir + "/hierarchy.json", art.hierarchy_json_text);
        }
        if (cfg.formats.count("csv")) {
            write_text(cfg.out_dir + "/design.csv", design_csv(p.dm));
            if (art.have_samples)
                write_samples_csv(cfg.out_dir + "/samples.csv", art.samples);
        }
        if (cfg.formats.count("svg"))
            write_text(cfg.out_dir + "/forest.svg", art.forest_svg_text);
        return kExitOk;
    });
}

} // namespace cnma
