#include "mhdeep/pipeline.hpp"

#include <algorithm>
#include <map>

#include "mhdeep/gmm.hpp"
#include "mhdeep/ingest.hpp"
#include "mhdeep/rng.hpp"

namespace mhdeep::pipeline {

std::uint64_t run_seed(std::uint64_t global_seed, const CategorySet& subset, int partition_index) {
    return derive_seed(global_seed, "run",
                       {static_cast<std::uint64_t>(subset.bits()),
                        static_cast<std::uint64_t>(partition_index)});
}

std::vector<std::pair<std::string, ClassLabel>> cohort_subjects(
    const std::vector<ParticipantRecording>& cohort) {
    std::vector<std::pair<std::string, ClassLabel>> subjects;
    subjects.reserve(cohort.size());
    for (const auto& rec : cohort) subjects.emplace_back(rec.participant_id, rec.label);
    return subjects;
}

TaskData build_task_data(const std::vector<ParticipantRecording>& cohort, Task task,
                         const CategorySet& subset, const dataset::PartitionScheme& scheme,
                         int smote_k, std::uint64_t seed) {
    const ClassLabel disorder = task_disorder(task);
    std::array<std::vector<DataInstance>, 3> buckets;
    for (const auto& rec : cohort) {
        if (rec.label != ClassLabel::Healthy && rec.label != disorder) continue;
        const auto split = scheme.split_of(rec.participant_id);
        auto instances = ingest::window_and_flatten(ingest::synchronize(rec), subset);
        auto& bucket = buckets[static_cast<std::size_t>(split)];
        bucket.insert(bucket.end(), std::make_move_iterator(instances.begin()),
                      std::make_move_iterator(instances.end()));
    }

    TaskData data;
    data.train = InstanceSet::pack(buckets[0]);
    data.val = InstanceSet::pack(buckets[1]);
    data.test = InstanceSet::pack(buckets[2]);
    if (data.train.empty() || data.val.empty() || data.test.empty()) {
        throw DataError("task " + std::string(task_name(task)) +
                        " has an empty train, validation or test split; check the cohort");
    }
    data.dims = category_dims(subset);

    data.stats = dataset::normalize_fit(data.train.features);
    dataset::normalize_apply(data.stats, data.train.features);
    dataset::normalize_apply(data.stats, data.val.features);
    dataset::normalize_apply(data.stats, data.test.features);

    // up-sample the minority class of the training split only
    const Eigen::Index positives = data.train.labels.sum();
    const Eigen::Index negatives = data.train.rows() - positives;
    if (positives != negatives) {
        const int minority_label = positives < negatives ? 1 : 0;
        const Eigen::Index majority = std::max(positives, negatives);
        std::vector<Eigen::Index> minority_rows;
        for (Eigen::Index r = 0; r < data.train.rows(); ++r) {
            if (data.train.labels(r) == minority_label) minority_rows.push_back(r);
        }
        Eigen::MatrixXd minority(static_cast<Eigen::Index>(minority_rows.size()), data.train.dim());
        for (Eigen::Index i = 0; i < minority.rows(); ++i) {
            minority.row(i) = data.train.features.row(minority_rows[static_cast<std::size_t>(i)]);
        }
        const Eigen::MatrixXd balanced =
            dataset::smote(minority, majority, smote_k, derive_seed(seed, "smote"));
        const Eigen::Index added = balanced.rows() - minority.rows();

        InstanceSet synthetic;
        synthetic.features = balanced.bottomRows(added);
        synthetic.labels = Eigen::VectorXi::Constant(added, minority_label);
        synthetic.participants.assign(static_cast<std::size_t>(added), "smote");
        synthetic.window_indices.assign(static_cast<std::size_t>(added), -1);
        data.train = InstanceSet::concat(data.train, synthetic);
        data.smote_added = added;
    }
    return data;
}

std::vector<eval::PatientSeries> patient_series(const InstanceSet& test,
                                                const Eigen::VectorXi& predictions) {
    if (test.rows() != predictions.size()) throw DataError("prediction/test size mismatch");
    std::map<std::string, std::vector<std::pair<int, std::pair<int, int>>>> grouped;
    for (Eigen::Index r = 0; r < test.rows(); ++r) {
        grouped[test.participants[static_cast<std::size_t>(r)]].push_back(
            {test.window_indices[static_cast<std::size_t>(r)], {predictions(r), test.labels(r)}});
    }
    std::vector<eval::PatientSeries> series;
    series.reserve(grouped.size());
    for (auto& [id, rows] : grouped) {
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        eval::PatientSeries s;
        s.participant_id = id;
        s.label = rows.front().second.second;
        s.predictions.reserve(rows.size());
        for (const auto& row : rows) s.predictions.push_back(row.second.first);
        series.push_back(std::move(s));
    }
    return series;
}

std::vector<labeler::LabelerSpec> labeler_grid_from_config(const cfg::LabelerConfig& config) {
    std::vector<labeler::LabelerSpec> grid;
    for (labeler::SplitCriterion c : {labeler::SplitCriterion::Gini, labeler::SplitCriterion::Entropy}) {
        for (int depth : config.tree_depths) {
            grid.push_back({labeler::LabelerSpec::Kind::DecisionTree, c, depth, 0});
        }
    }
    for (int n_trees : config.forest_trees) {
        grid.push_back({labeler::LabelerSpec::Kind::RandomForest, labeler::SplitCriterion::Gini, -1,
                        n_trees});
    }
    return grid;
}

PipelineResult run_pipeline(const std::vector<ParticipantRecording>& cohort,
                            const cfg::RunConfig& config, Task task, const CategorySet& subset,
                            int partition_index) {
    const std::uint64_t seed = run_seed(config.seed, subset, partition_index);

    // subject split depends only on (global seed, partition), so every task
    // and subset reuses identical assignments
    const auto scheme = dataset::partition(cohort_subjects(cohort), partition_index, config.seed);
    auto data = build_task_data(cohort, task, subset, scheme, config.dataset.smote_k,
                                derive_seed(seed, "data"));

    PipelineResult result;

    // synthetic data generation: component selection on the validation split,
    // refit on train+validation, then labeling with the best grid model
    gmm::FitOptions<double> opts;
    opts.max_iter = config.gmm.max_iter;
    opts.tol = config.gmm.tol;
    opts.variance_floor = config.gmm.variance_floor;
    const auto choice = gmm::select_components<double>(data.train.features, data.val.features,
                                                       config.gmm.candidates,
                                                       derive_seed(seed, "gmm-select"), opts);
    result.synth.n_star = choice.n_star;
    result.synth.gmm_scores = choice.validation_scores;

    const Eigen::MatrixXd synthetic =
        gmm::sample_synthetic<double>(data.train.features, data.val.features, choice.n_star,
                                      config.gmm.synthetic_samples,
                                      derive_seed(seed, "gmm-synth"), opts);

    const auto fit = labeler::fit_labeler(data.train.features, data.train.labels,
                                          data.val.features, data.val.labels,
                                          labeler_grid_from_config(config.labeler),
                                          derive_seed(seed, "labeler"));
    result.synth.labeler_description = fit.best.spec.describe();
    result.synth.labeler_accuracy = fit.best_accuracy;
    result.synth.labeler_grid = fit.grid;
    result.synth.synthetic_count = synthetic.rows();
    const Eigen::VectorXi synthetic_labels = labeler::label_synthetic(fit.best, synthetic);

    // pre-train dense on synthetic data, then grow-and-prune on real data
    auto net = nn::init_mlp<double>(config.architecture(task, data.dims),
                                    derive_seed(seed, "init"));
    growprune::pretrain(net, synthetic, synthetic_labels, config.growprune,
                        derive_seed(seed, "stage-pretrain"));
    auto synthesis = growprune::synthesize(std::move(net), data.train.features, data.train.labels,
                                           data.val.features, data.val.labels, config.growprune,
                                           derive_seed(seed, "stage-growprune"));
    result.history = std::move(synthesis.history);
    result.best_validation_accuracy = synthesis.best_validation_accuracy;

    // held-out evaluation
    const Eigen::VectorXi predictions = nn::predict(synthesis.model, data.test.features);
    result.test_metrics = eval::instance_metrics(predictions, data.test.labels);
    const auto series = patient_series(data.test, predictions);
    result.votes = eval::full_span_votes(series);
    result.sweep = eval::duration_sweep(series, config.evaluate.sweep_step_minutes);

    result.params = nn::count_params(synthesis.model);
    result.flops = nn::count_flops(synthesis.model);
    result.dense_params = nn::count_dense_params(synthesis.model.sizes);
    result.dense_flops = nn::count_dense_flops(synthesis.model.sizes);
    result.compression_params = nn::compression_ratio(result.dense_params, result.params);
    result.compression_flops = nn::compression_ratio(result.dense_flops, result.flops);

    result.model.net = std::move(synthesis.model);
    result.model.stats = std::move(data.stats);
    result.model.categories = subset;
    result.model.task = task;
    result.model.partition_index = partition_index;
    result.model.seed = config.seed;
    result.model.config_hash = config.hash();
    return result;
}

}  // namespace mhdeep::pipeline
