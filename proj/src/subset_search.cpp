#include "mhdeep/subset_search.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <optional>
#include <set>
#include <thread>

#include "mhdeep/checkpoint.hpp"
#include "mhdeep/rng.hpp"

namespace mhdeep::search {

std::vector<CategorySet> enumerate_subsets() {
    std::vector<CategorySet> subsets;
    subsets.reserve(255);
    for (unsigned bits = 1; bits <= 255; ++bits) {
        subsets.push_back(CategorySet::from_bits(bits));
    }
    return subsets;
}

std::vector<CategorySet> select_subsets(const cfg::RunConfig& config) {
    if (!config.search.subsets.empty()) {
        std::set<unsigned> seen;
        std::vector<CategorySet> subsets;
        for (const auto& text : config.search.subsets) {
            const auto set = CategorySet::parse(text);
            if (seen.insert(set.bits()).second) subsets.push_back(set);
        }
        std::sort(subsets.begin(), subsets.end(),
                  [](const CategorySet& a, const CategorySet& b) { return a.bits() < b.bits(); });
        return subsets;
    }
    if (config.search.full_sweep) return enumerate_subsets();

    // seeded sample without replacement, desk-scale default
    auto all = enumerate_subsets();
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(config.search.sample_count),
                                             all.size());
    Rng rng(derive_seed(config.seed, "search-sample"));
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + rng.uniform_index(all.size() - i);
        std::swap(all[i], all[j]);
    }
    all.resize(count);
    std::sort(all.begin(), all.end(),
              [](const CategorySet& a, const CategorySet& b) { return a.bits() < b.bits(); });
    return all;
}

SearchOutcome run_search(const std::vector<ParticipantRecording>& cohort,
                         const cfg::RunConfig& config) {
    const auto subsets = select_subsets(config);
    const auto& partitions = config.search.partitions;

    struct Job {
        std::size_t subset_index;
        std::size_t partition_slot;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        for (std::size_t p = 0; p < partitions.size(); ++p) jobs.push_back({s, p});
    }

    struct Slot {
        std::optional<PartitionOutcome> outcome;
        std::string error;
    };
    std::vector<Slot> slots(jobs.size());

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const auto& job = jobs[j];
            try {
                const auto result = pipeline::run_pipeline(cohort, config, config.task,
                                                           subsets[job.subset_index],
                                                           partitions[job.partition_slot]);
                PartitionOutcome outcome;
                outcome.partition_index = partitions[job.partition_slot];
                outcome.metrics = result.test_metrics;
                outcome.params = result.params;
                outcome.flops = result.flops;
                outcome.compression_params = result.compression_params;
                outcome.compression_flops = result.compression_flops;
                slots[j].outcome = std::move(outcome);
            } catch (const std::exception& e) {
                slots[j].error = e.what();
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(jobs.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // merge in canonical subset order; a subset with any failed partition is
    // logged and dropped from the ranking
    SearchOutcome outcome;
    outcome.partitions = partitions;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        SubsetResult result;
        result.categories = subsets[s];
        std::string error;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            if (jobs[j].subset_index != s) continue;
            if (slots[j].outcome) {
                result.partitions.push_back(*slots[j].outcome);
            } else if (error.empty()) {
                error = "partition " + std::to_string(partitions[jobs[j].partition_slot]) + ": " +
                        slots[j].error;
            }
        }
        if (!error.empty()) {
            outcome.failures.emplace_back(subsets[s], error);
            continue;
        }
        double total = 0.0;
        for (const auto& p : result.partitions) total += p.metrics.accuracy;
        result.average_accuracy = total / static_cast<double>(result.partitions.size());
        outcome.ranked.push_back(std::move(result));
    }
    std::stable_sort(outcome.ranked.begin(), outcome.ranked.end(),
                     [](const SubsetResult& a, const SubsetResult& b) {
                         if (a.average_accuracy != b.average_accuracy) {
                             return a.average_accuracy > b.average_accuracy;
                         }
                         return a.categories.bits() < b.categories.bits();
                     });
    return outcome;
}

namespace {

std::string ratio_cell(const std::optional<double>& v) {
    return eval::format_ratio(v);
}

}  // namespace

std::string results_csv(const SearchOutcome& outcome, std::uint64_t config_hash,
                        std::uint64_t seed) {
    std::string out;
    out += "# mhdeep-search v1\n";
    out += "# config_hash " + io::hash_hex(config_hash) + "\n";
    out += "# seed " + std::to_string(seed) + "\n";
    out += "subset,partition,params,flops,compression_params,compression_flops,accuracy,fpr,fnr,f1\n";
    char line[256];
    for (const auto& result : outcome.ranked) {
        for (const auto& p : result.partitions) {
            std::snprintf(line, sizeof(line), "\"%s\",%d,%lld,%lld,%.1f,%.1f,%.6f,%s,%s,%s\n",
                          result.categories.to_string().c_str(), p.partition_index, p.params,
                          p.flops, p.compression_params, p.compression_flops, p.metrics.accuracy,
                          ratio_cell(p.metrics.fpr).c_str(), ratio_cell(p.metrics.fnr).c_str(),
                          ratio_cell(p.metrics.f1).c_str());
            out += line;
        }
        std::snprintf(line, sizeof(line), "\"%s\",avg,,,,,%.6f,,,\n",
                      result.categories.to_string().c_str(), result.average_accuracy);
        out += line;
    }
    for (const auto& [subset, error] : outcome.failures) {
        out += "# failed \"" + subset.to_string() + "\": " + error + "\n";
    }
    return out;
}

std::string results_text(const SearchOutcome& outcome, int top_k, std::uint64_t config_hash,
                         std::uint64_t seed) {
    std::string out;
    out += "mhdeep subset search\n";
    out += "config_hash " + io::hash_hex(config_hash) + "\n";
    out += "seed " + std::to_string(seed) + "\n";
    out += "subsets evaluated: " + std::to_string(outcome.ranked.size() + outcome.failures.size()) +
           ", ranked: " + std::to_string(outcome.ranked.size()) + "\n\n";
    char line[256];
    const int shown = std::min<int>(top_k, static_cast<int>(outcome.ranked.size()));
    for (int i = 0; i < shown; ++i) {
        const auto& result = outcome.ranked[static_cast<std::size_t>(i)];
        std::snprintf(line, sizeof(line), "#%d (%s)\n", i + 1, result.categories.to_string().c_str());
        out += line;
        out += "  partition  params      flops       acc      fpr      fnr      f1\n";
        for (const auto& p : result.partitions) {
            std::snprintf(line, sizeof(line),
                          "  %-9d  %-9lld(%.1fx)  %-9lld(%.1fx)  %.4f  %-7s  %-7s  %-7s\n",
                          p.partition_index, p.params, p.compression_params, p.flops,
                          p.compression_flops, p.metrics.accuracy, ratio_cell(p.metrics.fpr).c_str(),
                          ratio_cell(p.metrics.fnr).c_str(), ratio_cell(p.metrics.f1).c_str());
            out += line;
        }
        std::snprintf(line, sizeof(line), "  average accuracy %.4f\n\n", result.average_accuracy);
        out += line;
    }
    for (const auto& [subset, error] : outcome.failures) {
        out += "failed subset " + subset.to_string() + ": " + error + "\n";
    }
    return out;
}

}  // namespace mhdeep::search
