#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eegtriage/errors.hpp"
#include "eegtriage/log.hpp"
#include "eegtriage/pipeline.hpp"

namespace {

struct CliOverrides {
    std::string config;
    std::string input;
    std::string labels;
    std::string out;
    std::string model;
    std::vector<std::string> disorders;
    double target_recall = 0.0;
    double window_s = 0.0;
    std::uint64_t seed = 0;
    int threads = 0;
    int cv_k = 0;
};

void add_common_options(CLI::App* sub, CliOverrides& cli) {
    sub->add_option("--config", cli.config, "JSON config file; flags override its values");
    sub->add_option("--input", cli.input, "EDF corpus directory");
    sub->add_option("--labels", cli.labels, "labels.csv path");
    sub->add_option("--out", cli.out, "artifact output directory");
    sub->add_option("--disorder", cli.disorders, "restrict to this disorder (repeatable)");
    sub->add_option("--model", cli.model, "model kind for the selected disorders")
        ->check(CLI::IsMember({"gbdt", "mlp"}));
    sub->add_option("--target-recall", cli.target_recall, "calibration recall floor");
    sub->add_option("--seed", cli.seed, "split / training seed");
    sub->add_option("--threads", cli.threads, "worker threads (0 = hardware)");
    sub->add_option("--window-s", cli.window_s, "window length in seconds");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace eegtriage;

    CLI::App app{"EEG screening pipeline: synth | extract | train | calibrate | evaluate | report"};
    app.require_subcommand(1);
    CliOverrides cli;
    for (const char* name : {"synth", "extract", "train", "calibrate", "evaluate", "report"})
        add_common_options(app.add_subcommand(name), cli);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    PipelineConfig cfg;
    CLI::App* sub = app.get_subcommands().front();
    try {
        if (sub->count("--config")) cfg = PipelineConfig::from_json_file(cli.config);
        if (sub->count("--input")) cfg.input_dir = cli.input;
        if (sub->count("--labels")) cfg.labels_path = cli.labels;
        if (sub->count("--out")) cfg.out_dir = cli.out;
        if (sub->count("--disorder")) cfg.disorders = cli.disorders;
        if (sub->count("--model")) {
            if (cfg.disorders.empty())
                cfg.model_kind["*"] = cli.model;
            else
                for (const std::string& d : cfg.disorders) cfg.model_kind[d] = cli.model;
        }
        if (sub->count("--target-recall")) cfg.target_recall = cli.target_recall;
        if (sub->count("--seed")) {
            cfg.seed = cli.seed;
            cfg.synth.seed = cli.seed;
        }
        if (sub->count("--threads")) cfg.threads = cli.threads;
        if (sub->count("--window-s")) cfg.window_s = cli.window_s;
    } catch (const Error& e) {
        log_error(e.what());
        return kExitUsage;
    }

    if (sub->get_name() == "synth") return cmd_synth(cfg);
    if (sub->get_name() == "extract") return cmd_extract(cfg);
    if (sub->get_name() == "train") return cmd_train(cfg);
    if (sub->get_name() == "calibrate") return cmd_calibrate(cfg);
    if (sub->get_name() == "evaluate") return cmd_evaluate(cfg);
    if (sub->get_name() == "report") return cmd_report(cfg);
    return kExitUsage;
}
