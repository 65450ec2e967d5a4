#include "mhdeep/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "mhdeep/checkpoint.hpp"
#include "mhdeep/config.hpp"
#include "mhdeep/gmm.hpp"
#include "mhdeep/ingest.hpp"
#include "mhdeep/pipeline.hpp"
#include "mhdeep/report.hpp"
#include "mhdeep/rng.hpp"
#include "mhdeep/simulate.hpp"
#include "mhdeep/subset_search.hpp"

namespace mhdeep::cli {

namespace {

namespace fs = std::filesystem;

struct CliOverrides {
    std::string config_path;
    std::string cohort;
    std::string out;
    std::string task;
    std::string subset;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int partition = 0;
    int workers = 0;
    // command-specific
    std::string checkpoint;
    std::string participant;
};

cfg::RunConfig resolve_config(const CliOverrides& o) {
    cfg::RunConfig config;
    if (!o.config_path.empty()) config = cfg::load_config(o.config_path);
    if (o.seed_set) {
        config.seed = o.seed;
        config.seed_provided = true;
    }
    if (!o.task.empty()) {
        const auto t = task_from_name(o.task);
        if (!t) throw ConfigError("config field 'task': unknown task '" + o.task + "'");
        config.task = *t;
    }
    if (!o.cohort.empty()) config.cohort_dir = o.cohort;
    if (!o.out.empty()) config.out_dir = o.out;
    if (o.partition > 0) config.partition_index = o.partition;
    if (!o.subset.empty()) config.subset = CategorySet::parse(o.subset);
    if (o.workers > 0) config.workers = o.workers;
    config.validate();
    return config;
}

fs::path prepare_out_dir(const cfg::RunConfig& config) {
    const fs::path out(config.out_dir);
    fs::create_directories(out);
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot write " + path.string());
    file << content;
}

void write_resolved_config(const cfg::RunConfig& config, const fs::path& out) {
    // the resolved settings, not the sparse input file: artifacts stay
    // interpretable without the original config
    write_text(out / "resolved_config.json", cfg::resolved_config_text(config));
}

std::vector<ParticipantRecording> load_cohort_checked(const cfg::RunConfig& config) {
    if (config.cohort_dir.empty()) {
        throw ConfigError("config field 'cohort': required for this command (or pass --cohort)");
    }
    return ingest::load_cohort(config.cohort_dir);
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

int cmd_simulate(const cfg::RunConfig& config) {
    config.require_seed();
    auto spec = config.simulate;
    spec.seed = config.seed;
    spec.validate();
    const fs::path out = prepare_out_dir(config);

    std::vector<std::pair<ClassLabel, int>> jobs;
    for (int ci = 0; ci < kNumClasses; ++ci) {
        for (int i = 0; i < spec.class_counts[static_cast<std::size_t>(ci)]; ++i) {
            jobs.emplace_back(static_cast<ClassLabel>(ci), i);
        }
    }
    if (jobs.empty()) throw ConfigError("config field 'simulate': all class counts are zero");

    const auto hash = config.hash();
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const auto rec = sim::generate_participant(spec, jobs[j].first, jobs[j].second);
            sim::write_participant(rec, out / rec.participant_id, hash, config.seed);
        }
    };
    const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(jobs.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    write_resolved_config(config, out);
    std::printf("simulated %zu participants (%g min each) into %s\n", jobs.size(),
                spec.recording_minutes, out.string().c_str());
    return 0;
}

int cmd_ingest(const cfg::RunConfig& config) {
    const auto cohort = load_cohort_checked(config);
    const fs::path out = prepare_out_dir(config);

    std::vector<DataInstance> all;
    for (const auto& rec : cohort) {
        auto instances = ingest::window_and_flatten(ingest::synchronize(rec), config.subset);
        std::printf("%s  label=%s  windows=%zu\n", rec.participant_id.c_str(),
                    std::string(class_name(rec.label)).c_str(), instances.size());
        all.insert(all.end(), std::make_move_iterator(instances.begin()),
                   std::make_move_iterator(instances.end()));
    }
    const auto set = InstanceSet::pack(all);
    io::write_instances(set, out / "instances.csv",
                        {"mhdeep-instances v1", report::provenance_line(config),
                         "subset " + config.subset.to_string()});
    write_resolved_config(config, out);
    std::printf("wrote %lld instances of dimension %lld to %s\n",
                static_cast<long long>(set.rows()), static_cast<long long>(set.dim()),
                (out / "instances.csv").string().c_str());
    return 0;
}

int cmd_partition(const cfg::RunConfig& config) {
    config.require_seed();
    if (config.cohort_dir.empty()) {
        throw ConfigError("config field 'cohort': required for this command (or pass --cohort)");
    }
    const auto subjects = ingest::load_manifests(config.cohort_dir);
    const auto scheme = dataset::partition(subjects, config.partition_index, config.seed);
    const fs::path out = prepare_out_dir(config);
    const auto path = out / ("partition_" + std::to_string(config.partition_index) + ".txt");
    dataset::write_partition(scheme, path, config.hash(), config.seed);
    for (const auto& [label, counts] : scheme.counts) {
        std::printf("%s: %d train / %d val / %d test\n", std::string(class_name(label)).c_str(),
                    counts[0], counts[1], counts[2]);
    }
    std::printf("wrote %s\n", path.string().c_str());
    return 0;
}

int cmd_synth(const cfg::RunConfig& config) {
    config.require_seed();
    const auto cohort = load_cohort_checked(config);
    const fs::path out = prepare_out_dir(config);

    // mirror the training pipeline's synthetic-data stage, same seeds
    const auto seed = pipeline::run_seed(config.seed, config.subset, config.partition_index);
    const auto scheme =
        dataset::partition(pipeline::cohort_subjects(cohort), config.partition_index, config.seed);
    const auto data = pipeline::build_task_data(cohort, config.task, config.subset, scheme,
                                                config.dataset.smote_k, derive_seed(seed, "data"));
    gmm::FitOptions<double> opts;
    opts.max_iter = config.gmm.max_iter;
    opts.tol = config.gmm.tol;
    opts.variance_floor = config.gmm.variance_floor;
    const auto choice = gmm::select_components<double>(data.train.features, data.val.features,
                                                       config.gmm.candidates,
                                                       derive_seed(seed, "gmm-select"), opts);
    const auto synthetic =
        gmm::sample_synthetic<double>(data.train.features, data.val.features, choice.n_star,
                                      config.gmm.synthetic_samples, derive_seed(seed, "gmm-synth"),
                                      opts);
    const auto fit = labeler::fit_labeler(data.train.features, data.train.labels,
                                          data.val.features, data.val.labels,
                                          pipeline::labeler_grid_from_config(config.labeler),
                                          derive_seed(seed, "labeler"));
    const auto labels = labeler::label_synthetic(fit.best, synthetic);

    InstanceSet set;
    set.features = synthetic;
    set.labels = labels;
    set.participants.assign(static_cast<std::size_t>(synthetic.rows()), "synthetic");
    set.window_indices.resize(static_cast<std::size_t>(synthetic.rows()));
    for (Eigen::Index i = 0; i < synthetic.rows(); ++i) {
        set.window_indices[static_cast<std::size_t>(i)] = static_cast<int>(i);
    }
    char extra[160];
    std::snprintf(extra, sizeof(extra), "n_star %d labeler %s val_accuracy %.6f", choice.n_star,
                  fit.best.spec.describe().c_str(), fit.best_accuracy);
    io::write_instances(set, out / "synthetic.csv",
                        {"mhdeep-synthetic v1", report::provenance_line(config), extra});
    write_resolved_config(config, out);
    std::printf("gmm components: %d, labeler: %s\n", choice.n_star,
                fit.best.spec.describe().c_str());
    std::printf("wrote %lld labeled synthetic instances to %s\n",
                static_cast<long long>(set.rows()), (out / "synthetic.csv").string().c_str());
    return 0;
}

int cmd_train(const cfg::RunConfig& config) {
    config.require_seed();
    const auto cohort = load_cohort_checked(config);
    const fs::path out = prepare_out_dir(config);

    const auto result = pipeline::run_pipeline(cohort, config, config.task, config.subset,
                                               config.partition_index);
    io::save_checkpoint(result.model, out / "checkpoint.ckpt");
    write_text(out / "report.txt", report::run_report(result, config, config.task, config.subset,
                                                      config.partition_index, true));
    write_text(out / "duration_curve.csv", report::curve_csv(result.sweep, config));
    write_text(out / "history.txt", report::history_log(result.history, config));
    write_resolved_config(config, out);

    std::printf("test accuracy %.4f, best validation %.4f, params %lld (%.1fx)\n",
                result.test_metrics.accuracy, result.best_validation_accuracy, result.params,
                result.compression_params);
    std::printf("artifacts in %s\n", out.string().c_str());
    return 0;
}

int cmd_search(const cfg::RunConfig& config) {
    config.require_seed();
    const auto cohort = load_cohort_checked(config);
    const fs::path out = prepare_out_dir(config);

    const auto outcome = search::run_search(cohort, config);
    write_text(out / "search_results.csv", search::results_csv(outcome, config.hash(), config.seed));
    const auto text = search::results_text(outcome, config.search.top_k, config.hash(), config.seed);
    write_text(out / "search_results.txt", text);
    write_resolved_config(config, out);
    std::fputs(text.c_str(), stdout);
    std::printf("results in %s\n", out.string().c_str());
    return 0;
}

// rebuilds the checkpoint's test split and evaluates it
int cmd_evaluate(const cfg::RunConfig& config, const std::string& checkpoint_path) {
    if (checkpoint_path.empty()) throw ConfigError("evaluate requires --checkpoint");
    const auto model = io::load_checkpoint(checkpoint_path);
    const auto cohort = load_cohort_checked(config);
    const fs::path out = prepare_out_dir(config);

    const auto scheme =
        dataset::partition(pipeline::cohort_subjects(cohort), model.partition_index, model.seed);
    const ClassLabel disorder = task_disorder(model.task);
    std::vector<DataInstance> rows;
    for (const auto& rec : cohort) {
        if (rec.label != ClassLabel::Healthy && rec.label != disorder) continue;
        if (scheme.split_of(rec.participant_id) != dataset::Split::Test) continue;
        auto instances = ingest::window_and_flatten(ingest::synchronize(rec), model.categories);
        rows.insert(rows.end(), std::make_move_iterator(instances.begin()),
                    std::make_move_iterator(instances.end()));
    }
    if (rows.empty()) throw DataError("no test-split participants found in the cohort");
    auto test = InstanceSet::pack(rows);
    dataset::normalize_apply(model.stats, test.features);

    pipeline::PipelineResult result;
    const Eigen::VectorXi predictions = nn::predict(model.net, test.features);
    result.test_metrics = eval::instance_metrics(predictions, test.labels);
    const auto series = pipeline::patient_series(test, predictions);
    result.votes = eval::full_span_votes(series);
    result.sweep = eval::duration_sweep(series, config.evaluate.sweep_step_minutes);
    result.params = nn::count_params(model.net);
    result.flops = nn::count_flops(model.net);
    result.dense_params = nn::count_dense_params(model.net.sizes);
    result.dense_flops = nn::count_dense_flops(model.net.sizes);
    result.compression_params = nn::compression_ratio(result.dense_params, result.params);
    result.compression_flops = nn::compression_ratio(result.dense_flops, result.flops);

    write_text(out / "report.txt", report::run_report(result, config, model.task, model.categories,
                                                      model.partition_index, false));
    write_text(out / "duration_curve.csv", report::curve_csv(result.sweep, config));
    std::printf("test accuracy %.4f over %lld instances, saturation %g min\n",
                result.test_metrics.accuracy, result.test_metrics.counts.total(),
                result.sweep.saturation_minutes);
    std::printf("report in %s\n", (out / "report.txt").string().c_str());
    return 0;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& participant_dir) {
    if (checkpoint_path.empty()) throw ConfigError("predict requires --checkpoint");
    if (participant_dir.empty()) throw ConfigError("predict requires --participant");
    const auto model = io::load_checkpoint(checkpoint_path);
    const auto rec = ingest::load_participant(participant_dir);

    double common_start = rec.streams.front().start_ms;
    double common_end = rec.streams.front().end_ms();
    for (const auto& s : rec.streams) {
        common_start = std::max(common_start, s.start_ms);
        common_end = std::min(common_end, s.end_ms());
    }
    if (common_end - common_start < kWindowSeconds * 1000.0) {
        throw DataError("recording too short: participant " + rec.participant_id + " has " +
                        std::to_string((common_end - common_start) / 1000.0) +
                        " s of overlapping data, at least one " +
                        std::to_string(kWindowSeconds) + " s window is required");
    }
    const auto instances =
        ingest::window_and_flatten(ingest::synchronize(rec), model.categories);
    auto set = InstanceSet::pack(instances);
    dataset::normalize_apply(model.stats, set.features);
    const Eigen::VectorXi predictions = nn::predict(model.net, set.features);

    std::printf("participant %s (%lld windows, task %s)\n", rec.participant_id.c_str(),
                static_cast<long long>(set.rows()), std::string(task_name(model.task)).c_str());
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
        std::printf("window %d: %s\n", set.window_indices[static_cast<std::size_t>(i)],
                    predictions(i) == 1 ? "disorder" : "healthy");
    }
    std::vector<int> votes(predictions.data(), predictions.data() + predictions.size());
    const double full_minutes = static_cast<double>(votes.size()) * 15.0 / 60.0;
    const int vote = eval::patient_vote(votes, full_minutes);
    const long long positive = predictions.sum();
    std::printf("patient vote over %g min: %s (%lld of %lld windows)\n", full_minutes,
                vote == 1 ? "disorder" : "healthy", vote == 1 ? positive : set.rows() - positive,
                static_cast<long long>(set.rows()));
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"wearable-sensor mental-state pipeline: simulation, ingestion, GMM-based "
                 "synthetic data, masked grow-and-prune training, and evaluation"};
    app.require_subcommand(1);

    CliOverrides o;
    std::string command;

    const auto add_common = [&](CLI::App* sub, bool needs_out = true) {
        sub->add_option("--config", o.config_path, "JSON config file");
        sub->add_option("--seed", o.seed, "global RNG seed (no wall-clock default)")
            ->check(CLI::NonNegativeNumber)
            ->each([&](const std::string&) { o.seed_set = true; });
        sub->add_option("--task", o.task, "bipolar | mdd | schizo");
        sub->add_option("--partition", o.partition, "data partition 1..3")->check(CLI::Range(1, 3));
        sub->add_option("--subset", o.subset, "category subset: bitmask or names (GSR,ST,...)");
        sub->add_option("--workers", o.workers, "worker pool bound")->check(CLI::PositiveNumber);
        if (needs_out) sub->add_option("--out", o.out, "output directory");
        sub->callback([&, sub] { command = sub->get_name(); });
        return sub;
    };

    auto* p_simulate = add_common(app.add_subcommand("simulate", "generate a synthetic cohort"));
    (void)p_simulate;
    add_common(app.add_subcommand("ingest", "parse, synchronize and window a cohort"))
        ->add_option("--cohort", o.cohort, "participant directory root");
    add_common(app.add_subcommand("partition", "write a subject-disjoint split"))
        ->add_option("--cohort", o.cohort, "participant directory root");
    add_common(app.add_subcommand("synth", "GMM synthetic data generation and labeling"))
        ->add_option("--cohort", o.cohort, "participant directory root");
    add_common(app.add_subcommand("train", "full pipeline for one task/partition/subset"))
        ->add_option("--cohort", o.cohort, "participant directory root");
    add_common(app.add_subcommand("search", "category subset sweep"))
        ->add_option("--cohort", o.cohort, "participant directory root");
    auto* p_eval = add_common(app.add_subcommand("evaluate", "evaluate a checkpoint on its test split"));
    p_eval->add_option("--cohort", o.cohort, "participant directory root");
    p_eval->add_option("--checkpoint", o.checkpoint, "checkpoint file");
    auto* p_predict = add_common(app.add_subcommand("predict", "predict one participant directory"),
                                 /*needs_out=*/false);
    p_predict->add_option("--checkpoint", o.checkpoint, "checkpoint file");
    p_predict->add_option("--participant", o.participant, "participant directory");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (command == "predict") return cmd_predict(o.checkpoint, o.participant);
        const auto config = resolve_config(o);
        if (command == "simulate") return cmd_simulate(config);
        if (command == "ingest") return cmd_ingest(config);
        if (command == "partition") return cmd_partition(config);
        if (command == "synth") return cmd_synth(config);
        if (command == "train") return cmd_train(config);
        if (command == "search") return cmd_search(config);
        if (command == "evaluate") return cmd_evaluate(config, o.checkpoint);
        std::fprintf(stderr, "unknown command '%s'\n", command.c_str());
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}

}  // namespace mhdeep::cli
