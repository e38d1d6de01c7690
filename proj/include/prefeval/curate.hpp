#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "prefeval/corpus.hpp"
#include "prefeval/judge.hpp"
#include "prefeval/types.hpp"

namespace prefeval::prompt {
struct TemplateSet;
}

namespace prefeval::curate {

/// Ordered original -> replacement name pairs. Originals and replacements are
/// each distinct; originals sharing a family name (final whitespace token) get
/// replacements sharing one.
struct NameMap {
    std::vector<std::pair<std::string, std::string>> entries;

    bool empty() const { return entries.empty(); }
};

/// Throws DataError on duplicate originals/replacements, on a replacement that
/// appears as a whole word inside an original, or on family-name incoherence.
void validate_name_map(const NameMap& map);

/// Rewrites replacements so originals sharing a family name share one (the
/// first replacement's family name wins). Throws if the repair collides.
NameMap repair_family_names(NameMap map);

struct EntityMapResult {
    NameMap map;
    int retries = 0;
};

/// Asks the backend for a JSON object mapping each character/location name in
/// `body` to an invented replacement. Invalid JSON is retried up to
/// `max_attempts` total attempts with exponential backoff; family-name
/// incoherence is repaired locally.
EntityMapResult extract_entity_map(const std::string& body, judge::ChatBackend& backend,
                                   int max_attempts = 3,
                                   std::chrono::milliseconds backoff_initial =
                                       std::chrono::milliseconds{1000});

/// Deterministic whole-word replacement, longest original first. Case
/// sensitive; pure text transformation.
std::string apply_anonymization(const std::string& body, const NameMap& map);

struct SummaryResult {
    std::string text;
    std::int64_t input_words = 0;
    std::int64_t output_words = 0;
    bool no_op = false;  // body was already within target length
};

/// Backend-driven summarization toward `target_words`. Bodies at or under the
/// target pass through unchanged. Empty or non-shrinking summaries are errors.
SummaryResult summarize(const std::string& body, judge::ChatBackend& backend, int target_words);

/// Populates a title-only item's body with a backend-produced description.
/// Items that already have a body are returned unchanged. Refusal text from
/// the backend becomes an error.
Item enrich_with_description(const Item& item, judge::ChatBackend& backend);

struct ScalarDataset {
    std::vector<ScalarExample> ift;
    std::vector<ScalarExample> test;
};

/// One example per (reviewer, alignment-partition review): profile of K
/// history entries plus the alignment item as query, gold = the held review.
/// Examples land in the ift or test set by the reviewer's partition. Throws
/// DataError when a reviewer lacks K history reviews.
ScalarDataset build_scalar_dataset(const Corpus& corpus, const SplitManifest& manifest, int k,
                                   std::uint64_t seed);

/// Raw crowd annotation: one worker's per-aspect choices over a plot pair,
/// values in {A, B, Both, Neither}.
struct RawAnnotation {
    std::string annotation_id;
    std::string annotator_id;
    std::string premise;
    Item plot_a;
    Item plot_b;
    std::vector<std::pair<Aspect, std::string>> answers;
};

/// Drops Both/Neither answers per aspect, removes annotators left with fewer
/// than 2 usable annotations, and gives each example a K=1 profile rendered
/// from a different annotation by the same annotator. Throws DataError on an
/// unknown answer label.
std::vector<PairwiseExample> build_pairwise_dataset(const std::vector<RawAnnotation>& annotations);

struct IftRecord {
    std::string prompt;
    std::string completion;
    std::string reviewer_id;
    std::string example_id;
    std::string task;  // "scalar" | "pairwise"
};

/// Renders instruction-tuning records to JSONL. Any example from a reviewer
/// outside the ift partition aborts the export before a line is written.
std::size_t export_ift(const std::vector<ScalarExample>& examples,
                       const SplitManifest& manifest, const prompt::TemplateSet& templates,
                       const std::filesystem::path& out_path, ScoreScale scale = {1, 10});

std::size_t export_ift(const std::vector<PairwiseExample>& examples,
                       const SplitManifest& manifest, const prompt::TemplateSet& templates,
                       const std::filesystem::path& out_path);

std::string scalar_completion(const ScalarExample& example);
std::string pairwise_completion(const PairwiseExample& example);

struct AnonymizationAudit {
    std::string item_id;
    NameMap map;
    int retries = 0;
};

void save_audit_log(const std::vector<AnonymizationAudit>& audits,
                    const std::filesystem::path& path);

void save_scalar_examples(const std::vector<ScalarExample>& examples,
                          const std::filesystem::path& path);
std::vector<ScalarExample> load_scalar_examples(const std::filesystem::path& path);

void save_pairwise_examples(const std::vector<PairwiseExample>& examples,
                            const std::filesystem::path& path);
std::vector<PairwiseExample> load_pairwise_examples(const std::filesystem::path& path);

std::vector<RawAnnotation> load_annotations(const std::filesystem::path& path);

} // namespace prefeval::curate
