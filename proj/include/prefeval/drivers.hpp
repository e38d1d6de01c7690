#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prefeval/baselines.hpp"
#include "prefeval/corpus.hpp"
#include "prefeval/judge.hpp"
#include "prefeval/metrics.hpp"
#include "prefeval/prompt.hpp"
#include "prefeval/types.hpp"

namespace prefeval::drivers {

/// Anything that can score a query item under a reviewer profile. The profile
/// arrives in presentation order, so order-sensitive predictors (LLM judges)
/// see exactly what a prompt would show.
class ScorePredictor {
public:
    virtual ~ScorePredictor() = default;
    virtual std::string name() const = 0;
    /// nullopt when no prediction is available (e.g. unparseable completion).
    virtual std::optional<double> predict(const ReviewerProfile& profile, const Item& query) = 0;
};

/// Mean of profile scores; the profile-free (K = 0) case falls back to a
/// caller-supplied global mean, the "one-score-fits-all" predictor.
class ReviewerAvgPredictor : public ScorePredictor {
public:
    explicit ReviewerAvgPredictor(double global_mean_fallback)
        : fallback_(global_mean_fallback) {}
    std::string name() const override { return "reviewer_avg"; }
    std::optional<double> predict(const ReviewerProfile& profile, const Item& query) override;

private:
    double fallback_;
};

/// Fold-in against a trained factor model; empty profiles predict the model's
/// global mean.
class MfPredictor : public ScorePredictor {
public:
    explicit MfPredictor(const baselines::MfModel& model) : model_(model) {}
    std::string name() const override { return "matrix_factorization"; }
    std::optional<double> predict(const ReviewerProfile& profile, const Item& query) override;

private:
    const baselines::MfModel& model_;
};

/// One prompt/completion round-trip per prediction through a chat backend.
class JudgePredictor : public ScorePredictor {
public:
    JudgePredictor(judge::ChatBackend& backend, const prompt::TemplateSet& templates,
                   ScoreScale scale = {1, 10}, std::string label = "judge")
        : backend_(backend), templates_(templates), scale_(scale), label_(std::move(label)) {}
    std::string name() const override { return label_; }
    std::optional<double> predict(const ReviewerProfile& profile, const Item& query) override;

private:
    judge::ChatBackend& backend_;
    const prompt::TemplateSet& templates_;
    ScoreScale scale_;
    std::string label_;
};

struct EvalRow {
    std::string predictor;
    std::size_t n_examples = 0;
    std::size_t n_scored = 0;
    metrics::CorrelationReport report;
    /// Set when the correlation is undefined (constant predictions or gold, or
    /// fewer than 2 scored examples); the report then holds zeros.
    bool degenerate = false;
};

/// Scores every example and correlates predictions with gold scores.
EvalRow evaluate_examples(const std::vector<ScalarExample>& examples, ScorePredictor& predictor);

struct SweepRow {
    int k = 0;
    EvalRow eval;
};

/// Full scalar pipeline per K: filter reviewers for K history entries, build
/// profiles and examples, score, correlate. Evaluates test-partition examples
/// unless `include_ift`. Throws DataError when no example supports some K.
std::vector<SweepRow> sweep_profile_size(const Corpus& corpus, const SplitManifest& manifest,
                                         const std::vector<int>& k_values,
                                         ScorePredictor& predictor, std::uint64_t seed,
                                         bool include_ift = false);

struct ShuffleRow {
    std::string predictor;
    int k = 0;
    int trials = 0;
    double kendall_mean = 0.0;
    double kendall_std = 0.0;  // population std over trials
    std::vector<double> per_trial;
};

/// Reruns the evaluation `trials` times with profile entries permuted per
/// (example, trial) and reports the Kendall mean and spread. Order-invariant
/// predictors give a spread of exactly zero. Requires trials >= 2.
ShuffleRow shuffle_trials(const std::vector<ScalarExample>& examples, ScorePredictor& predictor,
                          int trials, std::uint64_t base_seed);

std::string sweep_csv_header();
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

std::string shuffle_csv_header();
void write_shuffle_csv(const std::vector<ShuffleRow>& rows, const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;
    std::vector<std::pair<std::string, std::string>> input_hashes;  // path -> fnv1a64 hex
};

/// Hashes every input file and writes the manifest JSON next to the outputs.
void write_run_manifest(RunManifest manifest, const std::vector<std::filesystem::path>& inputs,
                        const std::filesystem::path& path);

} // namespace prefeval::drivers
