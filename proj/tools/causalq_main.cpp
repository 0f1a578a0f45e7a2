// Command-line front end: reproducible generate / train / sample / evaluate
// pipelines over the library. Every command writes a manifest echoing its
// fully resolved configuration next to its outputs.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalq/datagen.hpp"
#include "causalq/exact_oracle.hpp"
#include "causalq/metrics.hpp"
#include "causalq/numeric.hpp"
#include "causalq/sampler.hpp"
#include "causalq/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace causalq;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_manifest(const fs::path& dir, const std::string& command, json config) {
    config["command"] = command;
    const auto now = std::chrono::system_clock::now();
    config["wall_clock_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    write_file(dir / "manifest.json", config.dump(2));
}

Dataset load_data(const std::string& path, bool standardize_columns) {
    Dataset data = load_csv(path);
    if (standardize_columns) standardize(data);
    return data;
}

std::string bits_of(const State& s) {
    std::string out(s.num_vars, '0');
    for (int i = 0; i < s.num_vars; ++i)
        if (s.contains(i)) out[i] = '1';
    return out;
}

struct GenCli {
    GenConfig config;
    std::string out_dir = "gen_out";
    bool standardize_output = false;
};

int cmd_gen(const GenCli& cli) {
    cli.config.validate();
    Rng graph_rng(derive_seed(cli.config.seed, "gen/graph"));
    Rng data_rng(derive_seed(cli.config.seed, "gen/data"));
    const WeightedDag truth = er_dag(cli.config, graph_rng);
    Dataset data =
        linear_gaussian_sample(truth, cli.config.num_samples, cli.config.noise_std, data_rng);
    if (cli.standardize_output) standardize(data);

    const fs::path dir(cli.out_dir);
    write_file(dir / "truth.json", dag_to_json(truth));
    save_csv(data, (dir / "data.csv").string());
    write_manifest(dir, "gen",
                   json{{"num_vars", cli.config.num_vars},
                        {"expected_edges", cli.config.resolved_edges()},
                        {"p_edge", cli.config.edge_probability()},
                        {"num_samples", cli.config.num_samples},
                        {"weight_low", cli.config.weight_low},
                        {"weight_high", cli.config.weight_high},
                        {"noise_std", cli.config.noise_std},
                        {"standardize", cli.standardize_output},
                        {"seed", cli.config.seed},
                        {"edges_drawn", truth.edge_count()}});
    std::cout << "gen: wrote " << (dir / "truth.json").string() << " and "
              << (dir / "data.csv").string() << " (" << truth.edge_count() << " edges)\n";
    return 0;
}

struct TrainCli {
    TrainConfig config;
    std::string data_path;
    std::string out_dir = "train_out";
    bool standardize_input = false;
};

int cmd_train(const TrainCli& cli) {
    const Dataset data = load_data(cli.data_path, cli.standardize_input);
    const TrainResult result = train(data, cli.config);

    const fs::path dir(cli.out_dir);
    write_file(dir / "checkpoint.json", layered_models_to_json(result.models));
    std::string log_text;
    for (const EpisodeStats& stats : result.log) {
        json line{{"episode", stats.episode},
                  {"layer_loss", stats.layer_loss},
                  {"epsilon", stats.epsilon},
                  {"buffer_size", stats.buffer_size}};
        log_text += line.dump() + "\n";
    }
    write_file(dir / "train_log.jsonl", log_text);
    write_manifest(dir, "train",
                   json{{"data", cli.data_path},
                        {"episodes", cli.config.episodes},
                        {"epsilon", cli.config.epsilon},
                        {"batch_size", cli.config.batch_size},
                        {"learning_rate", cli.config.learning_rate},
                        {"buffer_capacity", cli.config.buffer_capacity},
                        {"updates_per_episode", cli.config.updates_per_episode},
                        {"hidden", cli.config.hidden},
                        {"clip_norm", cli.config.clip_norm},
                        {"tabular", cli.config.tabular},
                        {"standardize", cli.standardize_input},
                        {"seed", cli.config.seed}});
    std::cout << "train: wrote " << (dir / "checkpoint.json").string() << " after "
              << cli.config.episodes << " episodes\n";
    return 0;
}

struct SampleCli {
    std::string data_path;
    std::string checkpoint_path;
    std::string out_dir = "sample_out";
    int num_samples = 1000;
    int best = 20;
    double threshold = 0.3;
    std::uint64_t seed = 0;
    bool standardize_input = false;
};

int cmd_sample(const SampleCli& cli) {
    const Dataset data = load_data(cli.data_path, cli.standardize_input);
    LocalScoreCache cache(data);
    const LayeredQModels models = layered_models_from_json(read_file(cli.checkpoint_path));

    // keep every sampled graph, then select the best k
    const auto all = sample_best_k(models, cache, cli.num_samples, cli.num_samples, cli.threshold,
                                   derive_seed(cli.seed, "sample"));
    const fs::path dir(cli.out_dir);
    std::string lines;
    for (const ScoredDag& sd : all) {
        json j = json::parse(dag_to_json(sd.graph, sd.log_score));
        j["ordering"] = sd.ordering;
        j["ordering_log_prob"] = sd.ordering_log_prob;
        lines += j.dump() + "\n";
    }
    write_file(dir / "samples.jsonl", lines);

    json best = json::array();
    for (int i = 0; i < cli.best && i < static_cast<int>(all.size()); ++i) {
        json j = json::parse(dag_to_json(all[i].graph, all[i].log_score));
        j["ordering"] = all[i].ordering;
        best.push_back(std::move(j));
    }
    write_file(dir / "best_k.json", best.dump(2));
    write_manifest(dir, "sample",
                   json{{"data", cli.data_path},
                        {"checkpoint", cli.checkpoint_path},
                        {"num_samples", cli.num_samples},
                        {"best", cli.best},
                        {"threshold", cli.threshold},
                        {"standardize", cli.standardize_input},
                        {"seed", cli.seed}});
    std::cout << "sample: wrote " << (dir / "best_k.json").string() << " (top " << cli.best
              << " of " << cli.num_samples << ")\n";
    return 0;
}

struct GreedyCli {
    std::string data_path;
    std::string checkpoint_path;
    std::string out_dir = "greedy_out";
    double threshold = 0.3;
    bool standardize_input = false;
};

int cmd_greedy(const GreedyCli& cli) {
    const Dataset data = load_data(cli.data_path, cli.standardize_input);
    LocalScoreCache cache(data);
    const LayeredQModels models = layered_models_from_json(read_file(cli.checkpoint_path));

    const Ordering ordering = greedy_ordering(models);
    const WeightedDag pruned =
        prune_linear(ordering_to_full_dag(ordering, data.names), data, cli.threshold);
    const double score = dag_log_score(pruned, cache);

    const fs::path dir(cli.out_dir);
    write_file(dir / "greedy_graph.json", dag_to_json(pruned, score));
    write_file(dir / "greedy_graph.txt", dag_to_edge_list(pruned));
    write_manifest(dir, "greedy",
                   json{{"data", cli.data_path},
                        {"checkpoint", cli.checkpoint_path},
                        {"threshold", cli.threshold},
                        {"standardize", cli.standardize_input},
                        {"ordering", ordering}});
    std::cout << "greedy: wrote " << (dir / "greedy_graph.json").string() << " ("
              << pruned.edge_count() << " edges)\n";
    return 0;
}

struct ExactCli {
    std::string data_path;
    std::string out_dir = "exact_out";
    std::string mode = "auto";  // auto | dp | enum
    OracleLimits limits;
    bool standardize_input = false;
};

int cmd_exact(const ExactCli& cli) {
    const Dataset data = load_data(cli.data_path, cli.standardize_input);
    LocalScoreCache cache(data);
    const int d = data.num_vars();
    const bool want_enum = cli.mode == "enum" || (cli.mode == "auto" && d <= cli.limits.enum_max_vars);
    if (cli.mode == "enum" && d > cli.limits.enum_max_vars)
        throw LimitExceeded("exact: enumeration supports d <= " +
                            std::to_string(cli.limits.enum_max_vars) + " (got d = " +
                            std::to_string(d) + "); rerun with --mode dp");

    const fs::path dir(cli.out_dir);
    const ExactQTable table = exact_q_dp(cache, cli.limits);
    write_file(dir / "q_table.json", table.to_json());

    json manifest{{"data", cli.data_path},
                  {"mode", cli.mode},
                  {"num_vars", d},
                  {"standardize", cli.standardize_input},
                  {"dp_max_vars", cli.limits.dp_max_vars},
                  {"enum_max_vars", cli.limits.enum_max_vars}};
    if (want_enum) {
        const auto post = exact_ordering_posterior(cache, cli.limits);
        json entries = json::array();
        for (std::size_t i = 0; i < post.size(); ++i)
            entries.push_back(json{{"ordering", post.orderings[i]}, {"p", post.probabilities[i]}});
        write_file(dir / "posterior.json", entries.dump());
        const auto balance = check_detailed_balance(cache, cli.limits);
        manifest["detailed_balance_max_violation"] = balance.max_violation;
        manifest["detailed_balance_pairs"] = balance.pairs_checked;
    }
    write_manifest(dir, "exact", manifest);
    std::cout << "exact: wrote " << (dir / "q_table.json").string()
              << (want_enum ? " and posterior.json" : "") << "\n";
    return 0;
}

struct EvalCli {
    std::string graph_path;
    std::string truth_path;
    std::string out_dir = "eval_out";
};

int cmd_eval(const EvalCli& cli) {
    const WeightedDag truth = dag_from_json(read_file(cli.truth_path));
    const std::string text = read_file(cli.graph_path);
    const json parsed = json::parse(text);

    MetricsReport report;
    if (parsed.is_array()) {
        std::vector<WeightedDag> graphs;
        for (const auto& item : parsed) graphs.push_back(dag_from_json(item.dump()));
        report = evaluate(graphs, truth);
    } else {
        report = evaluate(dag_from_json(text), truth);
    }
    const fs::path dir(cli.out_dir);
    write_file(dir / "metrics.json", metrics_to_json(report));
    write_manifest(dir, "eval", json{{"graph", cli.graph_path}, {"truth", cli.truth_path}});
    std::cout << "eval: shd=" << report.summary.shd << " tpr=" << report.summary.tpr
              << " fdr=" << report.summary.fdr << " f1=" << report.summary.f1
              << " e_shd=" << report.e_shd << "\n";
    return 0;
}

struct CompareCli {
    std::string data_path;
    std::string checkpoint_path;
    std::string out_dir = "compare_out";
    int pairs = 250;
    std::uint64_t seed = 0;
    OracleLimits limits;
    bool standardize_input = false;
};

int cmd_compare_probs(const CompareCli& cli) {
    const Dataset data = load_data(cli.data_path, cli.standardize_input);
    LocalScoreCache cache(data);
    const LayeredQModels models = layered_models_from_json(read_file(cli.checkpoint_path));
    const int d = data.num_vars();
    const ExactQTable table = exact_q_dp(cache, cli.limits);

    std::vector<std::pair<std::uint64_t, int>> feasible;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
        const State s(m, d);
        for (int a : feasible_actions(s)) feasible.emplace_back(m, a);
    }

    Rng rng(derive_seed(cli.seed, "compare"));
    std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
    std::vector<double> estimated, exact;
    std::string csv = "state,action,estimated,exact\n";
    csv.reserve(cli.pairs * 32);
    for (int i = 0; i < cli.pairs; ++i) {
        const auto [mask, action] = feasible[pick(rng)];
        const State s(mask, d);
        const auto learned = transition_distribution(forward_masked(models.eval_model(s), s));
        const double est = learned.probs[action];
        const double exa = table.transition(s).probs[action];
        estimated.push_back(est);
        exact.push_back(exa);
        char line[128];
        std::snprintf(line, sizeof line, "%s,%d,%.17g,%.17g\n", bits_of(s).c_str(), action, est,
                      exa);
        csv += line;
    }
    const double r = pearson(estimated, exact);

    const fs::path dir(cli.out_dir);
    write_file(dir / "compare_probs.csv", csv);
    write_manifest(dir, "compare-probs",
                   json{{"data", cli.data_path},
                        {"checkpoint", cli.checkpoint_path},
                        {"pairs", cli.pairs},
                        {"seed", cli.seed},
                        {"standardize", cli.standardize_input},
                        {"pearson_r", r}});
    std::cout << "compare-probs: pearson r = " << r << " over " << cli.pairs << " pairs\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Posterior learning over DAG topological orderings on the order graph"};
    app.require_subcommand(1);
    app.set_config("--config");

    GenCli gen;
    auto* sub_gen = app.add_subcommand("gen", "generate a ground-truth DAG and dataset");
    sub_gen->add_option("-d,--num-vars", gen.config.num_vars, "number of variables");
    sub_gen->add_option("--edges", gen.config.expected_edges, "expected edge count (default 2d)");
    sub_gen->add_option("-n,--samples", gen.config.num_samples, "sample count");
    sub_gen->add_option("--weight-low", gen.config.weight_low, "minimum |edge weight|");
    sub_gen->add_option("--weight-high", gen.config.weight_high, "maximum |edge weight|");
    sub_gen->add_option("--noise-std", gen.config.noise_std, "noise standard deviation");
    sub_gen->add_option("--seed", gen.config.seed, "master seed");
    sub_gen->add_option("-o,--out", gen.out_dir, "output directory");
    sub_gen->add_flag("--standardize", gen.standardize_output, "standardize data columns");

    TrainCli tr;
    auto* sub_train = app.add_subcommand("train", "train layered Q-models on a dataset");
    sub_train->add_option("--data", tr.data_path, "dataset CSV")->required();
    sub_train->add_option("-o,--out", tr.out_dir, "output directory");
    sub_train->add_option("--episodes", tr.config.episodes, "rollout episodes");
    sub_train->add_option("--epsilon", tr.config.epsilon, "model-sampling probability");
    sub_train->add_option("--batch-size", tr.config.batch_size, "replay batch size");
    sub_train->add_option("--lr", tr.config.learning_rate, "learning rate");
    sub_train->add_option("--buffer-capacity", tr.config.buffer_capacity, "replay capacity");
    sub_train->add_option("--updates-per-episode", tr.config.updates_per_episode,
                          "gradient passes per rollout");
    sub_train->add_option("--hidden", tr.config.hidden, "hidden layer widths");
    sub_train->add_option("--clip-norm", tr.config.clip_norm, "gradient norm clip (0 = off)");
    sub_train->add_flag("--tabular", tr.config.tabular, "tabular model instead of the MLP");
    sub_train->add_option("--seed", tr.config.seed, "master seed");
    sub_train->add_flag("--standardize", tr.standardize_input, "standardize data columns");

    SampleCli sm;
    auto* sub_sample = app.add_subcommand("sample", "sample DAGs from a trained model");
    sub_sample->add_option("--data", sm.data_path, "dataset CSV")->required();
    sub_sample->add_option("--checkpoint", sm.checkpoint_path, "trained checkpoint")->required();
    sub_sample->add_option("-o,--out", sm.out_dir, "output directory");
    sub_sample->add_option("-n,--num-samples", sm.num_samples, "orderings to sample");
    sub_sample->add_option("-k,--best", sm.best, "graphs to keep");
    sub_sample->add_option("--threshold", sm.threshold, "pruning threshold");
    sub_sample->add_option("--seed", sm.seed, "master seed");
    sub_sample->add_flag("--standardize", sm.standardize_input, "standardize data columns");

    GreedyCli gr;
    auto* sub_greedy = app.add_subcommand("greedy", "decode the single best ordering");
    sub_greedy->add_option("--data", gr.data_path, "dataset CSV")->required();
    sub_greedy->add_option("--checkpoint", gr.checkpoint_path, "trained checkpoint")->required();
    sub_greedy->add_option("-o,--out", gr.out_dir, "output directory");
    sub_greedy->add_option("--threshold", gr.threshold, "pruning threshold");
    sub_greedy->add_flag("--standardize", gr.standardize_input, "standardize data columns");

    ExactCli ex;
    auto* sub_exact = app.add_subcommand("exact", "exact Q table / posterior for small graphs");
    sub_exact->add_option("--data", ex.data_path, "dataset CSV")->required();
    sub_exact->add_option("-o,--out", ex.out_dir, "output directory");
    sub_exact->add_option("--mode", ex.mode, "auto | dp | enum")
        ->check(CLI::IsMember({"auto", "dp", "enum"}));
    sub_exact->add_option("--dp-limit", ex.limits.dp_max_vars, "DP variable limit");
    sub_exact->add_option("--enum-limit", ex.limits.enum_max_vars, "enumeration variable limit");
    sub_exact->add_flag("--standardize", ex.standardize_input, "standardize data columns");

    EvalCli ev;
    auto* sub_eval = app.add_subcommand("eval", "score estimated graphs against the truth");
    sub_eval->add_option("--graph", ev.graph_path, "estimated graph JSON (object or array)")
        ->required();
    sub_eval->add_option("--truth", ev.truth_path, "ground-truth graph JSON")->required();
    sub_eval->add_option("-o,--out", ev.out_dir, "output directory");

    CompareCli cp;
    auto* sub_compare =
        app.add_subcommand("compare-probs", "learned vs exact transition probabilities");
    sub_compare->add_option("--data", cp.data_path, "dataset CSV")->required();
    sub_compare->add_option("--checkpoint", cp.checkpoint_path, "trained checkpoint")->required();
    sub_compare->add_option("-o,--out", cp.out_dir, "output directory");
    sub_compare->add_option("--pairs", cp.pairs, "state/action pairs to draw");
    sub_compare->add_option("--seed", cp.seed, "master seed");
    sub_compare->add_option("--dp-limit", cp.limits.dp_max_vars, "DP variable limit");
    sub_compare->add_flag("--standardize", cp.standardize_input, "standardize data columns");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sub_gen->parsed()) return cmd_gen(gen);
        if (sub_train->parsed()) return cmd_train(tr);
        if (sub_sample->parsed()) return cmd_sample(sm);
        if (sub_greedy->parsed()) return cmd_greedy(gr);
        if (sub_exact->parsed()) return cmd_exact(ex);
        if (sub_eval->parsed()) return cmd_eval(ev);
        if (sub_compare->parsed()) return cmd_compare_probs(cp);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
