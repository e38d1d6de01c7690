#include "prefeval/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "prefeval/curate.hpp"
#include "prefeval/errors.hpp"
#include "prefeval/jsonl.hpp"
#include "prefeval/text.hpp"

namespace prefeval::drivers {

std::optional<double> ReviewerAvgPredictor::predict(const ReviewerProfile& profile,
                                                    const Item& query) {
    (void)query;
    if (profile.entries.empty()) return fallback_;
    return baselines::reviewer_avg(profile);
}

std::optional<double> MfPredictor::predict(const ReviewerProfile& profile, const Item& query) {
    if (profile.entries.empty()) return model_.global_mean;
    baselines::FoldInResult user = baselines::mf_fold_in(model_, profile);
    return baselines::mf_predict(model_, user, query.item_id);
}

std::optional<double> JudgePredictor::predict(const ReviewerProfile& profile, const Item& query) {
    std::string prompt_text = prompt::render_scalar_prompt(profile, query, templates_.scalar,
                                                           scale_);
    judge::ChatResult completion = backend_.complete({prompt_text, std::nullopt, std::nullopt});
    judge::ScalarVerdict verdict = judge::parse_scalar(completion.text, scale_);
    if (!verdict.parse_ok) return std::nullopt;
    return static_cast<double>(verdict.score);
}

EvalRow evaluate_examples(const std::vector<ScalarExample>& examples, ScorePredictor& predictor) {
    EvalRow row;
    row.predictor = predictor.name();
    row.n_examples = examples.size();
    std::vector<double> preds, golds;
    for (const ScalarExample& ex : examples) {
        auto pred = predictor.predict(ex.profile, ex.query);
        if (!pred) continue;
        preds.push_back(*pred);
        golds.push_back(static_cast<double>(ex.gold_score));
    }
    row.n_scored = preds.size();
    row.report.n = preds.size();
    if (preds.size() < 2) {
        row.degenerate = true;
        return row;
    }
    try {
        row.report = metrics::correlate(preds, golds);
    } catch (const DataError&) {
        // Constant predictions (or gold): correlation undefined, reported as 0.
        row.degenerate = true;
        row.report = metrics::CorrelationReport{};
        row.report.n = preds.size();
    }
    return row;
}

std::vector<SweepRow> sweep_profile_size(const Corpus& corpus, const SplitManifest& manifest,
                                         const std::vector<int>& k_values,
                                         ScorePredictor& predictor, std::uint64_t seed,
                                         bool include_ift) {
    if (k_values.empty()) throw UsageError("sweep: no K values given");
    std::vector<SweepRow> rows;
    for (int k : k_values) {
        if (k < 0) throw UsageError("sweep: K must be >= 0");
        Corpus usable = filter_for_examples(corpus, manifest, k);
        curate::ScalarDataset dataset = curate::build_scalar_dataset(usable, manifest, k, seed);
        std::vector<ScalarExample> examples = dataset.test;
        if (include_ift) {
            examples.insert(examples.end(), dataset.ift.begin(), dataset.ift.end());
            std::sort(examples.begin(), examples.end(),
                      [](const ScalarExample& a, const ScalarExample& b) {
                          return a.example_id < b.example_id;
                      });
        }
        if (examples.empty())
            throw DataError("sweep: no examples available for K=" + std::to_string(k));
        SweepRow row;
        row.k = k;
        row.eval = evaluate_examples(examples, predictor);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::vector<std::size_t> trial_permutation(std::size_t n, std::uint64_t base_seed, int trial,
                                           const std::string& example_id) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng((base_seed + static_cast<std::uint64_t>(trial) * 0x9e3779b97f4a7c15ULL) ^
                        text::fnv1a64(example_id));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

} // namespace

ShuffleRow shuffle_trials(const std::vector<ScalarExample>& examples, ScorePredictor& predictor,
                          int trials, std::uint64_t base_seed) {
    if (trials < 2) throw UsageError("shuffle: trials must be >= 2");
    if (examples.empty()) throw DataError("shuffle: no examples");

    ShuffleRow row;
    row.predictor = predictor.name();
    row.k = static_cast<int>(examples.front().profile.entries.size());
    row.trials = trials;

    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> preds, golds;
        for (const ScalarExample& ex : examples) {
            ReviewerProfile shuffled;
            shuffled.reviewer_id = ex.profile.reviewer_id;
            auto order = trial_permutation(ex.profile.entries.size(), base_seed, trial,
                                           ex.example_id);
            for (std::size_t idx : order) shuffled.entries.push_back(ex.profile.entries[idx]);

            auto pred = predictor.predict(shuffled, ex.query);
            if (!pred) continue;
            preds.push_back(*pred);
            golds.push_back(static_cast<double>(ex.gold_score));
        }
        double kendall = 0.0;
        if (preds.size() >= 2) {
            try {
                kendall = metrics::kendall(preds, golds).r;
            } catch (const DataError&) {
                kendall = 0.0;  // degenerate trial
            }
        }
        row.per_trial.push_back(kendall);
    }

    double mean = std::accumulate(row.per_trial.begin(), row.per_trial.end(), 0.0) /
                  static_cast<double>(trials);
    double var = 0.0;
    for (double v : row.per_trial) var += (v - mean) * (v - mean);
    var /= static_cast<double>(trials);
    row.kendall_mean = mean;
    row.kendall_std = std::sqrt(var);
    return row;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string sweep_csv_header() {
    return "k,predictor,n_examples,n_scored,pearson,pearson_p,spearman,spearman_p,"
           "kendall,kendall_p,degenerate";
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ostringstream out;
    out << sweep_csv_header() << '\n';
    for (const SweepRow& row : rows) {
        const EvalRow& e = row.eval;
        out << row.k << ',' << e.predictor << ',' << e.n_examples << ',' << e.n_scored << ','
            << fmt(e.report.pearson.r) << ',' << fmt(e.report.pearson.p) << ','
            << fmt(e.report.spearman.r) << ',' << fmt(e.report.spearman.p) << ','
            << fmt(e.report.kendall.r) << ',' << fmt(e.report.kendall.p) << ','
            << (e.degenerate ? 1 : 0) << '\n';
    }
    jsonl::write_file(path, out.str());
}

std::string shuffle_csv_header() {
    return "predictor,k,trials,kendall_mean,kendall_std";
}

void write_shuffle_csv(const std::vector<ShuffleRow>& rows, const std::filesystem::path& path) {
    std::ostringstream out;
    out << shuffle_csv_header() << '\n';
    for (const ShuffleRow& row : rows) {
        out << row.predictor << ',' << row.k << ',' << row.trials << ','
            << fmt(row.kendall_mean) << ',' << fmt(row.kendall_std) << '\n';
    }
    jsonl::write_file(path, out.str());
}

void write_run_manifest(RunManifest manifest, const std::vector<std::filesystem::path>& inputs,
                        const std::filesystem::path& path) {
    for (const auto& input : inputs) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(text::fnv1a64(jsonl::read_file(input))));
        manifest.input_hashes.emplace_back(input.string(), buf);
    }
    jsonl::ordered_json doc;
    doc["command"] = manifest.command;
    doc["seed"] = manifest.seed;
    doc["config"] = manifest.config;
    jsonl::ordered_json hashes = jsonl::ordered_json::object();
    for (const auto& [file, hash] : manifest.input_hashes) hashes[file] = hash;
    doc["input_hashes"] = std::move(hashes);
    jsonl::write_file(path, doc.dump(2) + "\n");
}

} // namespace prefeval::drivers
