#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "prefeval/types.hpp"

namespace prefeval {

inline constexpr std::int64_t kNoWordLimit = std::numeric_limits<std::int64_t>::max();

struct CorpusSchema {
    int schema_version = 1;
    ScoreScale scale;
};

/// Immutable after load. Filters return new corpora; concurrent readers are safe.
struct Corpus {
    CorpusSchema schema;
    std::vector<Review> reviews;
    std::map<std::string, Item> items;  // may be empty when only reviews were loaded

    /// Review indices grouped by reviewer, in file order.
    std::map<std::string, std::vector<std::size_t>> by_reviewer() const;
    /// Review indices grouped by item, in file order.
    std::map<std::string, std::vector<std::size_t>> by_item() const;

    const Item* find_item(const std::string& item_id) const;
    double mean_score() const;
};

struct Rejection {
    std::size_t line = 0;
    std::string reason;
    std::string record;
};

struct LoadReport {
    Corpus corpus;
    std::vector<Rejection> rejections;
    std::vector<std::string> warnings;
};

/// Loads a review corpus from JSONL; malformed records (bad JSON, missing
/// fields, score out of range, duplicate reviewer/item pairs) are collected in
/// the rejection report. An optional items file attaches bodies and titles.
LoadReport load_corpus(const std::filesystem::path& reviews_path, const CorpusSchema& schema,
                       const std::filesystem::path& items_path = {});

std::vector<Item> load_items(const std::filesystem::path& path);

void save_corpus(const Corpus& corpus, const std::filesystem::path& reviews_path,
                 const std::filesystem::path& items_path = {});
void save_items(const std::vector<Item>& items, const std::filesystem::path& path);

/// Partitions reviewers into ift/test by `ratio` (|ift| = round(ratio * total))
/// and queries into history/alignment by `history_ratio`. Deterministic and
/// byte-identical for a fixed seed.
SplitManifest split_reviewers(const Corpus& corpus, double ratio, std::uint64_t seed,
                              double history_ratio = 0.8);

/// Drops reviewers with fewer than `min_reviews` reviews, along with their reviews.
Corpus filter_reviewers(const Corpus& corpus, int min_reviews);

/// Drops items longer than `max_words` along with their reviews. Pass
/// kNoWordLimit for the identity filter.
Corpus filter_by_length(const Corpus& corpus, std::int64_t max_words);

/// Length filter first, then the reviewer-count filter, so reviewer counts
/// reflect usable items. Verifies both predicates on the result.
Corpus apply_standard_filters(const Corpus& corpus, std::int64_t max_words, int min_reviews);

/// Keeps reviewers with at least `min_history` reviews on history queries and
/// at least one review on alignment queries, so profile and example
/// construction cannot run dry.
Corpus filter_for_examples(const Corpus& corpus, const SplitManifest& manifest, int min_history);

/// K entries per reviewer, sampled uniformly without replacement from the
/// reviewer's reviews on history queries. Fixed per (reviewer, seed): the same
/// seed always yields the same profiles regardless of corpus order. K = 0
/// yields empty profiles. Throws DataError when a reviewer lacks history.
std::vector<ReviewerProfile> build_profiles(const Corpus& corpus, const SplitManifest& manifest,
                                            int k, std::uint64_t seed);

/// Throws DataError if the reviewer or query partitions intersect.
void check_manifest_disjoint(const SplitManifest& manifest);

void save_manifest(const SplitManifest& manifest, const std::filesystem::path& path);
SplitManifest load_manifest(const std::filesystem::path& path);

void save_profiles(const std::vector<ReviewerProfile>& profiles,
                   const std::filesystem::path& path);
std::vector<ReviewerProfile> load_profiles(const std::filesystem::path& path);

} // namespace prefeval
