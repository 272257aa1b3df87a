#include "cnma/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool exclude_inestimable = false;
    std::optional<std::string> samples_file;
};

void add_common(CLI::App* sub, CommonArgs& args, bool with_samples) {
    sub->add_option("-c,--config", args.config, "Run configuration (JSON)")
        ->required();
    sub->add_option("--seed", args.seed,
                    "Override the sampling seed from the config");
    sub->add_option("-o,--out", args.out,
                    "Override the output directory from the config");
    sub->add_flag("--exclude-inestimable", args.exclude_inestimable,
                  "Drop inestimable elements instead of refusing");
    if (with_samples)
        sub->add_option("--samples-file", args.samples_file,
                        "Rank externally generated draws (CSV, one column per "
                        "element)");
}

int dispatch(const std::string& cmd, const CommonArgs& args) {
    cnma::RunConfig cfg;
    try {
        cfg = cnma::RunConfig::from_json_file(args.config);
    } catch (const cnma::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cnma::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cnma::kExitValidation;
    }
    cfg.seed_override = args.seed;
    cfg.out_override = args.out;
    cfg.exclude_inestimable = args.exclude_inestimable;
    cfg.samples_file = args.samples_file;

    if (cmd == "fit") return cnma::cmd_fit(cfg);
    if (cmd == "check") return cnma::cmd_check(cfg);
    if (cmd == "rank") return cnma::cmd_rank(cfg);
    return cnma::cmd_report(cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Additive component network meta-analysis"};
    app.require_subcommand(1);

    CommonArgs fit_args, check_args, rank_args, report_args;
    add_common(app.add_subcommand("fit", "Estimate component effects"),
               fit_args, false);
    add_common(app.add_subcommand("check",
                                  "Report estimability of a question set"),
               check_args, false);
    add_common(app.add_subcommand("rank", "Rank a set of interventions"),
               rank_args, true);
    add_common(app.add_subcommand(
                   "report", "Fit, check and rank in one run with all outputs"),
               report_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cnma::kExitOk : cnma::kExitValidation;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "fit") return dispatch(name, fit_args);
    if (name == "check") return dispatch(name, check_args);
    if (name == "rank") return dispatch(name, rank_args);
    return dispatch(name, report_args);
}
