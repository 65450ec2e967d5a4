#include "mhdeep/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mhdeep/errors.hpp"
#include "mhdeep/rng.hpp"

namespace mhdeep::cfg {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
}

void expect_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!keys.count(key)) {
            throw ConfigError("unknown config field '" + (section.empty() ? key : section + "." + key) + "'");
        }
    }
}

template <class T>
T get_number(const json& obj, const std::string& section, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) bad_field(section + "." + key, "expected a number");
    return v.get<T>();
}

bool get_bool(const json& obj, const std::string& section, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) bad_field(section + "." + key, "expected true or false");
    return v.get<bool>();
}

std::vector<int> get_int_list(const json& obj, const std::string& section, const char* key,
                              std::vector<int> fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_array()) bad_field(section + "." + key, "expected an array of integers");
    std::vector<int> out;
    for (const auto& item : v) {
        if (!item.is_number_integer()) bad_field(section + "." + key, "expected integers");
        out.push_back(item.get<int>());
    }
    return out;
}

// scalar or one-entry-per-channel array
Eigen::VectorXd get_channel_values(const json& obj, const std::string& section, const char* key,
                                   const Eigen::VectorXd& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_number()) return Eigen::VectorXd::Constant(1, v.get<double>());
    if (!v.is_array()) bad_field(section + "." + key, "expected a number or an array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto& item : v) {
        if (!item.is_number()) bad_field(section + "." + key, "expected numbers");
        out(i++) = item.get<double>();
    }
    return out;
}

json dump_vector(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

}  // namespace

std::vector<int> RunConfig::architecture(Task t, int input_dim) const {
    const std::vector<int>* hidden = &network.hidden_mdd;
    if (t == Task::Bipolar) hidden = &network.hidden_bipolar;
    if (t == Task::Schizo) hidden = &network.hidden_schizo;
    std::vector<int> sizes;
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), hidden->begin(), hidden->end());
    sizes.push_back(2);
    return sizes;
}

void RunConfig::validate() const {
    if (partition_index < 1 || partition_index > 3) {
        bad_field("partition", "must be 1, 2 or 3, got " + std::to_string(partition_index));
    }
    if (subset.empty()) bad_field("subset", "must name at least one data category");
    if (workers < 1) bad_field("workers", "must be >= 1");

    try {
        simulate.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(e.what());  // already names simulate.*
    }

    if (dataset.smote_k < 1) bad_field("dataset.smote_k", "must be >= 1");

    if (gmm.candidates.empty()) bad_field("gmm.candidates", "must be non-empty");
    for (int n : gmm.candidates) {
        if (n < 1) bad_field("gmm.candidates", "component counts must be >= 1");
    }
    if (gmm.max_iter < 1) bad_field("gmm.max_iter", "must be >= 1");
    if (gmm.tol <= 0.0) bad_field("gmm.tol", "must be > 0");
    if (gmm.variance_floor <= 0.0) bad_field("gmm.variance_floor", "must be > 0");
    if (gmm.synthetic_samples < 1) bad_field("gmm.synthetic_samples", "must be >= 1");

    if (labeler.tree_depths.empty() && labeler.forest_trees.empty()) {
        bad_field("labeler", "needs at least one tree depth or forest size");
    }
    for (int d : labeler.tree_depths) {
        if (d == 0 || d < -1) bad_field("labeler.tree_depths", "use positive depths or -1 for unlimited");
    }
    for (int n : labeler.forest_trees) {
        if (n < 1) bad_field("labeler.forest_trees", "must be >= 1");
    }

    for (const auto* hidden : {&network.hidden_mdd, &network.hidden_schizo, &network.hidden_bipolar}) {
        if (hidden->empty()) bad_field("network", "hidden widths must be non-empty");
        for (int w : *hidden) {
            if (w < 1) bad_field("network", "hidden widths must be positive");
        }
    }

    try {
        growprune.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(e.what());
    }

    if (evaluate.sweep_step_minutes <= 0.0) bad_field("evaluate.sweep_step_minutes", "must be > 0");

    if (search.sample_count < 1) bad_field("search.sample_count", "must be >= 1");
    if (search.partitions.empty()) bad_field("search.partitions", "must be non-empty");
    for (int p : search.partitions) {
        if (p < 1 || p > 3) bad_field("search.partitions", "entries must be 1, 2 or 3");
    }
    if (search.top_k < 1) bad_field("search.top_k", "must be >= 1");
    for (const auto& s : search.subsets) {
        CategorySet::parse(s);  // throws ConfigError on bad names
    }
}

void RunConfig::require_seed() const {
    if (!seed_provided) {
        throw ConfigError("config field 'seed': required (set it in the config file or pass --seed); "
                          "runs never default to wall-clock time");
    }
}

std::string RunConfig::canonical_dump() const {
    // cohort/out paths and the worker bound are deliberately absent: the
    // hash identifies the computation, and runs of one config into other
    // directories or with other pool sizes must produce identical artifacts
    json j;
    j["seed"] = seed;
    j["task"] = std::string(task_name(task));
    j["partition"] = partition_index;
    j["subset"] = subset.bits();

    j["simulate"]["healthy"] = simulate.class_counts[0];
    j["simulate"]["bipolar"] = simulate.class_counts[1];
    j["simulate"]["mdd"] = simulate.class_counts[2];
    j["simulate"]["schizoaffective"] = simulate.class_counts[3];
    j["simulate"]["recording_minutes"] = simulate.recording_minutes;
    j["simulate"]["class_shift"] = dump_vector(simulate.class_shift);
    j["simulate"]["noise_std"] = dump_vector(simulate.noise_std);
    j["simulate"]["subject_offset_std"] = simulate.subject_offset_std;
    j["simulate"]["start_jitter_ms"] = simulate.start_jitter_ms;

    j["dataset"]["smote_k"] = dataset.smote_k;

    j["gmm"]["candidates"] = gmm.candidates;
    j["gmm"]["max_iter"] = gmm.max_iter;
    j["gmm"]["tol"] = gmm.tol;
    j["gmm"]["variance_floor"] = gmm.variance_floor;
    j["gmm"]["synthetic_samples"] = gmm.synthetic_samples;

    j["labeler"]["tree_depths"] = labeler.tree_depths;
    j["labeler"]["forest_trees"] = labeler.forest_trees;

    j["network"]["hidden_mdd"] = network.hidden_mdd;
    j["network"]["hidden_schizo"] = network.hidden_schizo;
    j["network"]["hidden_bipolar"] = network.hidden_bipolar;

    j["growprune"]["alpha"] = growprune.alpha;
    j["growprune"]["num_iterations"] = growprune.num_iterations;
    j["growprune"]["epochs_per_change"] = growprune.epochs_per_change;
    j["growprune"]["initial_lr"] = growprune.initial_lr;
    j["growprune"]["lr_halving"] = growprune.lr_halving;
    j["growprune"]["batch_size"] = growprune.batch_size;
    j["growprune"]["pretrain_epochs"] = growprune.pretrain_epochs;
    j["growprune"]["pretrain_lr"] = growprune.pretrain_lr;
    j["growprune"]["warmup_epochs"] = growprune.warmup_epochs;
    j["growprune"]["warmup_lr"] = growprune.warmup_lr;

    j["evaluate"]["sweep_step_minutes"] = evaluate.sweep_step_minutes;

    j["search"]["subsets"] = search.subsets;
    j["search"]["sample_count"] = search.sample_count;
    j["search"]["full_sweep"] = search.full_sweep;
    j["search"]["partitions"] = search.partitions;
    j["search"]["top_k"] = search.top_k;

    return j.dump();  // nlohmann orders keys, so the dump is canonical
}

std::uint64_t RunConfig::hash() const {
    return fnv1a64(canonical_dump());
}

std::string resolved_config_text(const RunConfig& config) {
    json j = json::parse(config.canonical_dump());
    json wrapper;
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config.hash()));
    wrapper["config_hash"] = hex;
    wrapper["cohort"] = config.cohort_dir;
    wrapper["out"] = config.out_dir;
    wrapper["workers"] = config.workers;
    wrapper["resolved"] = j;
    return wrapper.dump(2) + "\n";
}

RunConfig parse_config_json(const std::string& text, const std::string& display_name) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(display_name + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(display_name + ": top level must be an object");

    expect_keys(j, "", {"seed", "task", "cohort", "out", "partition", "subset", "workers",
                        "simulate", "dataset", "gmm", "labeler", "network", "growprune",
                        "evaluate", "search"});

    RunConfig c;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            bad_field("seed", "expected an unsigned integer");
        }
        c.seed = j["seed"].get<std::uint64_t>();
        c.seed_provided = true;
    }
    if (j.contains("task")) {
        if (!j["task"].is_string()) bad_field("task", "expected one of bipolar, mdd, schizo");
        const auto t = task_from_name(j["task"].get<std::string>());
        if (!t) bad_field("task", "unknown task '" + j["task"].get<std::string>() + "'");
        c.task = *t;
    }
    if (j.contains("cohort")) {
        if (!j["cohort"].is_string()) bad_field("cohort", "expected a path string");
        c.cohort_dir = j["cohort"].get<std::string>();
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) bad_field("out", "expected a path string");
        c.out_dir = j["out"].get<std::string>();
    }
    c.partition_index = get_number<int>(j, "", "partition", c.partition_index);
    if (j.contains("subset")) {
        const auto& v = j["subset"];
        if (v.is_string()) {
            c.subset = CategorySet::parse(v.get<std::string>());
        } else if (v.is_number_unsigned() || v.is_number_integer()) {
            c.subset = CategorySet::from_bits(v.get<unsigned>());
        } else {
            bad_field("subset", "expected a bitmask or comma-separated category names");
        }
    }
    c.workers = get_number<int>(j, "", "workers", c.workers);

    if (j.contains("simulate")) {
        const auto& s = j["simulate"];
        expect_keys(s, "simulate",
                    {"healthy", "bipolar", "mdd", "schizoaffective", "recording_minutes",
                     "class_shift", "noise_std", "subject_offset_std", "start_jitter_ms"});
        c.simulate.class_counts[0] = get_number<int>(s, "simulate", "healthy", c.simulate.class_counts[0]);
        c.simulate.class_counts[1] = get_number<int>(s, "simulate", "bipolar", c.simulate.class_counts[1]);
        c.simulate.class_counts[2] = get_number<int>(s, "simulate", "mdd", c.simulate.class_counts[2]);
        c.simulate.class_counts[3] =
            get_number<int>(s, "simulate", "schizoaffective", c.simulate.class_counts[3]);
        c.simulate.recording_minutes =
            get_number<double>(s, "simulate", "recording_minutes", c.simulate.recording_minutes);
        c.simulate.class_shift = get_channel_values(s, "simulate", "class_shift", c.simulate.class_shift);
        c.simulate.noise_std = get_channel_values(s, "simulate", "noise_std", c.simulate.noise_std);
        c.simulate.subject_offset_std =
            get_number<double>(s, "simulate", "subject_offset_std", c.simulate.subject_offset_std);
        c.simulate.start_jitter_ms =
            get_number<double>(s, "simulate", "start_jitter_ms", c.simulate.start_jitter_ms);
    }

    if (j.contains("dataset")) {
        const auto& s = j["dataset"];
        expect_keys(s, "dataset", {"smote_k"});
        c.dataset.smote_k = get_number<int>(s, "dataset", "smote_k", c.dataset.smote_k);
    }

    if (j.contains("gmm")) {
        const auto& s = j["gmm"];
        expect_keys(s, "gmm", {"candidates", "max_iter", "tol", "variance_floor", "synthetic_samples"});
        c.gmm.candidates = get_int_list(s, "gmm", "candidates", c.gmm.candidates);
        c.gmm.max_iter = get_number<int>(s, "gmm", "max_iter", c.gmm.max_iter);
        c.gmm.tol = get_number<double>(s, "gmm", "tol", c.gmm.tol);
        c.gmm.variance_floor = get_number<double>(s, "gmm", "variance_floor", c.gmm.variance_floor);
        c.gmm.synthetic_samples =
            get_number<long long>(s, "gmm", "synthetic_samples", c.gmm.synthetic_samples);
    }

    if (j.contains("labeler")) {
        const auto& s = j["labeler"];
        expect_keys(s, "labeler", {"tree_depths", "forest_trees"});
        c.labeler.tree_depths = get_int_list(s, "labeler", "tree_depths", c.labeler.tree_depths);
        c.labeler.forest_trees = get_int_list(s, "labeler", "forest_trees", c.labeler.forest_trees);
    }

    if (j.contains("network")) {
        const auto& s = j["network"];
        expect_keys(s, "network", {"hidden_mdd", "hidden_schizo", "hidden_bipolar"});
        c.network.hidden_mdd = get_int_list(s, "network", "hidden_mdd", c.network.hidden_mdd);
        c.network.hidden_schizo = get_int_list(s, "network", "hidden_schizo", c.network.hidden_schizo);
        c.network.hidden_bipolar = get_int_list(s, "network", "hidden_bipolar", c.network.hidden_bipolar);
    }

    if (j.contains("growprune")) {
        const auto& s = j["growprune"];
        expect_keys(s, "growprune",
                    {"alpha", "num_iterations", "epochs_per_change", "initial_lr", "lr_halving",
                     "batch_size", "pretrain_epochs", "pretrain_lr", "warmup_epochs", "warmup_lr"});
        c.growprune.alpha = get_number<double>(s, "growprune", "alpha", c.growprune.alpha);
        c.growprune.num_iterations =
            get_number<int>(s, "growprune", "num_iterations", c.growprune.num_iterations);
        c.growprune.epochs_per_change =
            get_number<int>(s, "growprune", "epochs_per_change", c.growprune.epochs_per_change);
        c.growprune.initial_lr = get_number<double>(s, "growprune", "initial_lr", c.growprune.initial_lr);
        c.growprune.lr_halving = get_bool(s, "growprune", "lr_halving", c.growprune.lr_halving);
        c.growprune.batch_size = get_number<int>(s, "growprune", "batch_size", c.growprune.batch_size);
        c.growprune.pretrain_epochs =
            get_number<int>(s, "growprune", "pretrain_epochs", c.growprune.pretrain_epochs);
        c.growprune.pretrain_lr =
            get_number<double>(s, "growprune", "pretrain_lr", c.growprune.pretrain_lr);
        c.growprune.warmup_epochs =
            get_number<int>(s, "growprune", "warmup_epochs", c.growprune.warmup_epochs);
        c.growprune.warmup_lr = get_number<double>(s, "growprune", "warmup_lr", c.growprune.warmup_lr);
    }

    if (j.contains("evaluate")) {
        const auto& s = j["evaluate"];
        expect_keys(s, "evaluate", {"sweep_step_minutes"});
        c.evaluate.sweep_step_minutes =
            get_number<double>(s, "evaluate", "sweep_step_minutes", c.evaluate.sweep_step_minutes);
    }

    if (j.contains("search")) {
        const auto& s = j["search"];
        expect_keys(s, "search", {"subsets", "sample_count", "full_sweep", "partitions", "top_k"});
        if (s.contains("subsets")) {
            if (!s["subsets"].is_array()) bad_field("search.subsets", "expected an array of subsets");
            c.search.subsets.clear();
            for (const auto& item : s["subsets"]) {
                if (item.is_string()) {
                    c.search.subsets.push_back(item.get<std::string>());
                } else if (item.is_number_unsigned() || item.is_number_integer()) {
                    c.search.subsets.push_back(std::to_string(item.get<unsigned>()));
                } else {
                    bad_field("search.subsets", "entries must be names or bitmasks");
                }
            }
        }
        c.search.sample_count = get_number<int>(s, "search", "sample_count", c.search.sample_count);
        c.search.full_sweep = get_bool(s, "search", "full_sweep", c.search.full_sweep);
        c.search.partitions = get_int_list(s, "search", "partitions", c.search.partitions);
        c.search.top_k = get_number<int>(s, "search", "top_k", c.search.top_k);
    }

    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str(), path.string());
}

}  // namespace mhdeep::cfg
