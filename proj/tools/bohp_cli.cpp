// Command-line harness: train, gradcheck, summarize, dump-episode.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bohp/gradcheck.hpp"
#include "bohp/model_io.hpp"
#include "bohp/summary.hpp"
#include "bohp/trainer.hpp"

#ifndef BOHP_VERSION
#define BOHP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string task = "completion";
    std::size_t n = 8;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double gamma = 0.5;
    std::size_t episodes = 10500;
    std::size_t freeze_last = 500;
    double lr = 0.01;
    std::string optimizer = "sgd";
    double init_scale = 0.1;
    std::string loss = "l1";
    bool clip_alpha_nonnegative = false;
    std::size_t runs = 20;
    unsigned threads = 0;
    std::string out;
    std::size_t instances = 100;
    double epsilon = 1e-4;
    double tolerance = 1e-4;
    std::string fault = "none";
    std::string model;
};

const std::map<std::string, std::string> kTasks{
    {"completion", "completion"}, {"oneshot", "oneshot"}, {"reversal", "reversal"}};

std::uint64_t resolve_seed(const Options& o) {
    if (o.seed_given) return o.seed;
    if (const char* env = std::getenv("BOHP_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw bohp::UsageError("BOHP_SEED is not an unsigned integer: '" + std::string(env) + "'");
    }
    return 0;
}

bohp::TrainConfig train_config(const Options& o) {
    bohp::TrainConfig cfg;
    cfg.episodes_total = o.episodes;
    cfg.freeze_last = o.freeze_last;
    cfg.learning_rate = o.lr;
    cfg.optimizer = bohp::optimizer_kind_from_string(o.optimizer);
    cfg.gamma = o.gamma;
    cfg.init_scale = o.init_scale;
    cfg.clip_alpha_nonnegative = o.clip_alpha_nonnegative;
    cfg.seed = resolve_seed(o);
    cfg.task.kind = bohp::task_kind_from_string(o.task);
    cfg.task.n = o.n;
    cfg.completion_loss = bohp::loss_kind_from_string(o.loss);
    cfg.validate();
    return cfg;
}

json config_json(const bohp::TrainConfig& cfg, std::size_t runs) {
    return {{"task", bohp::to_string(cfg.task.kind)},
            {"n", cfg.task.n},
            {"episodes", cfg.episodes_total},
            {"freeze_last", cfg.freeze_last},
            {"lr", cfg.learning_rate},
            {"optimizer", bohp::to_string(cfg.optimizer)},
            {"gamma", cfg.gamma},
            {"init_scale", cfg.init_scale},
            {"loss", bohp::to_string(cfg.completion_loss)},
            {"clip_alpha_nonnegative", cfg.clip_alpha_nonnegative},
            {"seed", cfg.seed},
            {"runs", runs}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

int cmd_train(const Options& o) {
    if (o.out.empty()) throw bohp::UsageError("train needs --out");
    if (o.runs == 0) throw bohp::UsageError("--runs must be at least 1");
    const bohp::TrainConfig cfg = train_config(o);
    const fs::path out = o.out;
    fs::create_directories(out / "models");

    const auto seeds = bohp::run_seeds(cfg.seed, o.runs);
    const bohp::RunStats stats = bohp::multi_run(cfg, seeds, o.threads);

    if (!stats.runs.empty()) {
        std::ostringstream csv;
        bohp::write_curve_csv(stats, csv);
        write_text(out / "curve.csv", csv.str());
    }

    json runs = json::array();
    for (const auto& run : stats.runs) {
        const std::string name = "run_seed_" + std::to_string(run.seed) + ".json";
        bohp::save_model({run.final_model, cfg.task}, (out / "models" / name).string());
        json r{{"seed", run.seed},
               {"model", "models/" + name},
               {"frozen_error", bohp::frozen_mean(run, cfg, bohp::Metric::Error)},
               {"frozen_loss", bohp::frozen_mean(run, cfg, bohp::Metric::Loss)}};
        if (cfg.task.kind != bohp::TaskKind::Completion)
            r["frozen_accuracy"] = bohp::frozen_mean(run, cfg, bohp::Metric::Accuracy);
        if (cfg.task.kind == bohp::TaskKind::Reversal)
            r["frozen_post_reversal_accuracy"] = bohp::frozen_mean(run, cfg, bohp::Metric::PostReversalAccuracy);
        runs.push_back(std::move(r));
    }
    json diverged = json::array();
    for (const auto& d : stats.diverged)
        diverged.push_back({{"seed", d.seed}, {"episode", d.episode + 1}, {"message", d.message}});

    json manifest{{"command", "train"},
                  {"version", BOHP_VERSION},
                  {"compiler", __VERSION__},
                  {"config", config_json(cfg, o.runs)},
                  {"seeds", seeds},
                  {"runs", std::move(runs)},
                  {"diverged", std::move(diverged)},
                  {"files", {{"curve", "curve.csv"}, {"models", "models/"}}}};
    write_text(out / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "trained " << stats.runs.size() << "/" << o.runs << " runs; artifacts in " << out.string()
              << '\n';
    if (!stats.median.empty()) {
        const std::size_t last = stats.median.size() - 1;
        std::cout << "final-episode median error " << stats.median[last] << '\n';
    }
    for (const auto& d : stats.diverged) std::cerr << "run with seed " << d.seed << " diverged: " << d.message << '\n';
    return stats.diverged.empty() ? 0 : 2;
}

int cmd_gradcheck(const Options& o) {
    bohp::GradcheckSuiteConfig cfg;
    cfg.instances = o.instances;
    cfg.seed = resolve_seed(o);
    cfg.fd.epsilon = o.epsilon;
    cfg.fd.tolerance = o.tolerance;
    if (o.fault == "drop-cross-input") cfg.fault = bohp::GradientFault::DropCrossInputCoupling;
    else if (o.fault == "negate-alpha") cfg.fault = bohp::GradientFault::NegateAlpha;
    else if (o.fault != "none") throw bohp::UsageError("unknown fault '" + o.fault + "'");

    const auto result = bohp::run_gradcheck_suite(cfg);
    json report = result.report.to_json();
    report["summary"]["instances"] = result.instances;
    report["summary"]["rejected_near_kink"] = result.rejected;
    report["summary"]["failed_instances"] = result.failed_instances;
    report["summary"]["epsilon"] = cfg.fd.epsilon;
    report["summary"]["tolerance"] = cfg.fd.tolerance;
    report["summary"]["seed"] = cfg.seed;

    if (!o.out.empty()) {
        const fs::path out = o.out;
        fs::create_directories(out);
        write_text(out / "gradcheck.json", report.dump(2) + "\n");
    }
    std::cout << "gradcheck: " << result.instances << " instances, " << result.report.entries.size()
              << " parameters, max relative error " << result.report.max_rel_error << ", mean "
              << result.report.mean_rel_error << (result.report.pass ? " PASS" : " FAIL") << '\n';
    if (!result.report.pass) {
        std::size_t shown = 0;
        for (const auto& e : result.report.entries) {
            if (e.pass) continue;
            std::cerr << "  " << e.id.to_string() << ": analytical " << e.analytical << " vs fd "
                      << e.finite_difference << " (rel " << e.rel_error << ")\n";
            if (++shown == 20) {
                std::cerr << "  ...\n";
                break;
            }
        }
    }
    return result.report.pass ? 0 : 1;
}

int cmd_summarize(const Options& o) {
    const auto doc = bohp::load_model(o.model);
    const auto summary = bohp::summarize(doc);
    std::cout << summary.table();
    if (!o.out.empty()) {
        const fs::path out = o.out;
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_text(out, summary.to_json().dump(2) + "\n");
    }
    return 0;
}

int cmd_dump_episode(const Options& o) {
    bohp::TaskConfig task;
    task.kind = bohp::task_kind_from_string(o.task);
    task.n = o.n;
    task.seed = resolve_seed(o);
    task.validate();
    const std::string text = bohp::to_json(bohp::generate_episode(task)).dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        const fs::path out = o.out;
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_text(out, text);
    }
    return 0;
}

void add_task_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--task", o.task, "Experiment: completion | oneshot | reversal")
        ->transform(CLI::IsMember(kTasks))
        ->capture_default_str();
    cmd->add_option("--n", o.n, "Pattern length")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_seed_flag(CLI::App* cmd, Options& o) {
    cmd->add_option_function<std::uint64_t>(
           "--seed", [&o](std::uint64_t v) { o.seed = v, o.seed_given = true; },
           "Base seed (falls back to $BOHP_SEED, then 0)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Networks with trained Hebbian plasticity: training and checking harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", BOHP_VERSION);
    Options o;

    auto* train = app.add_subcommand("train", "Train seeded runs and write curve CSV, models and manifest");
    add_task_flags(train, o);
    add_seed_flag(train, o);
    train->add_option("--episodes", o.episodes, "Total episodes per run")->capture_default_str();
    train->add_option("--freeze-last", o.freeze_last, "Final episodes evaluated with frozen parameters")
        ->capture_default_str();
    train->add_option("--lr", o.lr, "Learning rate")->capture_default_str();
    train->add_option("--optimizer", o.optimizer, "sgd | adam")
        ->check(CLI::IsMember({"sgd", "adam"}))
        ->capture_default_str();
    train->add_option("--gamma", o.gamma, "Hebbian trace time constant, in (0, 1]")->capture_default_str();
    train->add_option("--init-scale", o.init_scale, "Parameters start ~ U(-s, s)")->capture_default_str();
    train->add_option("--loss", o.loss, "Completion training loss: l1 | mse")
        ->check(CLI::IsMember({"l1", "mse"}))
        ->capture_default_str();
    train->add_flag("--clip-alpha-nonnegative", o.clip_alpha_nonnegative,
                    "Clamp plasticity coefficients to >= 0 after every update");
    train->add_option("--runs", o.runs, "Independent seeded runs")->capture_default_str();
    train->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
    train->add_option("--out", o.out, "Output directory")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytical gradients with finite differences");
    add_seed_flag(gradcheck, o);
    gradcheck->add_option("--instances", o.instances, "Random instances")->capture_default_str();
    gradcheck->add_option("--epsilon", o.epsilon, "Central-difference step")->capture_default_str();
    gradcheck->add_option("--tolerance", o.tolerance, "Maximum relative error")->capture_default_str();
    gradcheck->add_option("--inject-fault", o.fault,
                          "Sabotage the analytical gradient to test the checker: none | drop-cross-input | "
                          "negate-alpha")
        ->check(CLI::IsMember({"none", "drop-cross-input", "negate-alpha"}))
        ->capture_default_str();
    gradcheck->add_option("--out", o.out, "Directory for gradcheck.json");

    auto* summarize = app.add_subcommand("summarize", "Classify the connections of a trained model");
    summarize->add_option("model", o.model, "Model JSON written by train")->required()->check(CLI::ExistingFile);
    summarize->add_option("--out", o.out, "Write the summary JSON here");

    auto* dump = app.add_subcommand("dump-episode", "Print one generated episode as JSON");
    add_task_flags(dump, o);
    add_seed_flag(dump, o);
    dump->add_option("--out", o.out, "Write to this file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(o);
        if (gradcheck->parsed()) return cmd_gradcheck(o);
        if (summarize->parsed()) return cmd_summarize(o);
        if (dump->parsed()) return cmd_dump_episode(o);
    } catch (const bohp::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
