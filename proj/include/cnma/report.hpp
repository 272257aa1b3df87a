#pragma once

#include "cnma/ranking.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cnma {

// Exit codes shared by the CLI commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitEstimability = 3;

enum class SetSelector { Explicit, AllTreatments, AllComponents };

struct QuestionConfig {
    SetSelector selector = SetSelector::AllTreatments;
    std::vector<std::string> set;      // labels when selector == Explicit
    std::string reference;             // required
    HierarchyMetric metric = HierarchyMetric::PBest;
    Orientation orientation = Orientation::LargerBetter;
    int samples = 1000;
    std::uint64_t seed = 1;
    SampleMode mode = SampleMode::Joint;
};

struct RunConfig {
    std::string data;                  // contrast CSV path
    EffectsModel effects = EffectsModel::Common;
    std::string anchor;                // "" = unanchored
    std::vector<InteractionTerm> interactions;
    QuestionConfig question;
    std::string out_dir = "out";
    std::set<std::string> formats = {"json"}; // "json", "csv", "svg"

    // Command-line overrides.
    bool exclude_inestimable = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::optional<std::string> samples_file;   // external draws for `rank`

    // Paths in the config are resolved relative to the config file.
    static RunConfig from_json_file(const std::string& path);
};

// Subcommands.  Each returns a process exit code, printing human-readable
// progress to stdout and errors to stderr.
int cmd_fit(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);
int cmd_rank(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

// Deterministic forest-style SVG of the versus-reference effects next to the
// hierarchy metric values.
std::string forest_svg(const Hierarchy& h, const std::string& title);

// Serialized artefacts (exposed for tests).
std::string fit_json(const FitResult& fit, const DesignMatrices& dm);
std::string check_json(const EstimabilityReport& rep,
                       const std::vector<SetVerdict>& parameter_verdicts);
struct HierarchyReport {
    std::string question;
    Hierarchy hierarchy;
    std::vector<std::pair<std::string, std::string>> exclusions; // label, reason
    std::uint64_t seed = 0;
    int n_samples = 0;
    SampleMode mode = SampleMode::Joint;
    bool external_samples = false;
};
std::string hierarchy_json(const HierarchyReport& rep);
std::string design_csv(const DesignMatrices& dm);

} // namespace cnma
