#include "prefeval/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "prefeval/errors.hpp"
#include "prefeval/jsonl.hpp"
#include "prefeval/text.hpp"

namespace prefeval {

using jsonl::json;
using jsonl::ordered_json;

std::map<std::string, std::vector<std::size_t>> Corpus::by_reviewer() const {
    std::map<std::string, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < reviews.size(); ++i) out[reviews[i].reviewer_id].push_back(i);
    return out;
}

std::map<std::string, std::vector<std::size_t>> Corpus::by_item() const {
    std::map<std::string, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < reviews.size(); ++i) out[reviews[i].item_id].push_back(i);
    return out;
}

const Item* Corpus::find_item(const std::string& item_id) const {
    auto it = items.find(item_id);
    return it == items.end() ? nullptr : &it->second;
}

double Corpus::mean_score() const {
    if (reviews.empty()) return 0.0;
    double sum = 0.0;
    for (const Review& r : reviews) sum += r.score;
    return sum / static_cast<double>(reviews.size());
}

namespace {

Item item_from_json(const json& record) {
    Item item;
    item.item_id = record.at("item_id").get<std::string>();
    if (record.contains("title") && record["title"].is_string())
        item.title = record["title"].get<std::string>();
    item.body = record.value("body", std::string{});
    if (record.contains("provenance")) {
        auto p = provenance_from_name(record["provenance"].get<std::string>());
        if (!p) throw DataError("unknown provenance: " + record["provenance"].dump());
        item.provenance = *p;
    }
    item.word_count = text::count_words(item.body);
    return item;
}

ordered_json item_to_json(const Item& item) {
    ordered_json record;
    record["schema_version"] = 1;
    record["item_id"] = item.item_id;
    if (!item.title.empty()) record["title"] = item.title;
    record["body"] = item.body;
    record["provenance"] = std::string(provenance_name(item.provenance));
    return record;
}

} // namespace

std::vector<Item> load_items(const std::filesystem::path& path) {
    std::vector<Item> items;
    jsonl::for_each_record(path, [&](std::size_t line, const json& record) {
        try {
            items.push_back(item_from_json(record));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return items;
}

LoadReport load_corpus(const std::filesystem::path& reviews_path, const CorpusSchema& schema,
                       const std::filesystem::path& items_path) {
    LoadReport report;
    report.corpus.schema = schema;
    std::set<std::pair<std::string, std::string>> seen;

    auto reject = [&](std::size_t line, const std::string& raw, const std::string& reason) {
        report.rejections.push_back({line, reason, raw});
    };

    jsonl::for_each_record(
        reviews_path,
        [&](std::size_t line, const json& record) {
            Review review;
            try {
                review.reviewer_id = record.at("reviewer_id").get<std::string>();
                review.item_id = record.at("item_id").get<std::string>();
                review.score = record.at("score").get<int>();
                review.explanation = record.at("explanation").get<std::string>();
            } catch (const json::exception& e) {
                reject(line, record.dump(), std::string("missing or malformed field: ") + e.what());
                return;
            }
            if (!schema.scale.contains(review.score)) {
                reject(line, record.dump(), "score out of range");
                return;
            }
            auto key = std::make_pair(review.reviewer_id, review.item_id);
            if (!seen.insert(key).second) {
                reject(line, record.dump(), "duplicate (reviewer, item) pair");
                return;
            }
            report.corpus.reviews.push_back(std::move(review));
        },
        [&](std::size_t line, const std::string& raw, const std::string& what) {
            reject(line, raw, what);
        });

    if (report.corpus.reviews.empty() && report.rejections.empty())
        report.warnings.push_back("empty corpus: " + reviews_path.string());

    if (!items_path.empty()) {
        for (Item& item : load_items(items_path)) {
            auto [it, inserted] = report.corpus.items.emplace(item.item_id, std::move(item));
            if (!inserted)
                report.warnings.push_back("duplicate item_id ignored: " + it->first);
        }
    }
    return report;
}

void save_items(const std::vector<Item>& items, const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const Item& item : items) out.write(item_to_json(item));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& reviews_path,
                 const std::filesystem::path& items_path) {
    jsonl::Writer out(reviews_path);
    for (const Review& r : corpus.reviews) {
        ordered_json record;
        record["schema_version"] = corpus.schema.schema_version;
        record["reviewer_id"] = r.reviewer_id;
        record["item_id"] = r.item_id;
        record["score"] = r.score;
        record["explanation"] = r.explanation;
        out.write(record);
    }
    if (!items_path.empty()) {
        std::vector<Item> items;
        items.reserve(corpus.items.size());
        for (const auto& [_, item] : corpus.items) items.push_back(item);
        save_items(items, items_path);
    }
}

namespace {

/// Deterministic partition of sorted ids: shuffle with the seeded engine, take
/// the first `first_size` for the first part.
std::pair<std::set<std::string>, std::set<std::string>> partition_ids(
    std::vector<std::string> ids, std::size_t first_size, std::uint64_t seed) {
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::set<std::string> first(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(first_size));
    std::set<std::string> second(ids.begin() + static_cast<std::ptrdiff_t>(first_size), ids.end());
    return {std::move(first), std::move(second)};
}

} // namespace

SplitManifest split_reviewers(const Corpus& corpus, double ratio, std::uint64_t seed,
                              double history_ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split ratio must be in (0, 1)");
    if (!(history_ratio > 0.0 && history_ratio < 1.0))
        throw UsageError("history ratio must be in (0, 1)");
    if (corpus.reviews.empty()) throw DataError("cannot split an empty corpus");

    std::set<std::string> reviewer_set;
    std::set<std::string> item_set;
    for (const Review& r : corpus.reviews) {
        reviewer_set.insert(r.reviewer_id);
        item_set.insert(r.item_id);
    }
    if (reviewer_set.size() < 2) throw DataError("need at least 2 reviewers to split");

    SplitManifest manifest;
    manifest.seed = seed;

    std::vector<std::string> reviewers(reviewer_set.begin(), reviewer_set.end());
    auto ift_size = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(reviewers.size())));
    ift_size = std::clamp<std::size_t>(ift_size, 1, reviewers.size() - 1);
    std::tie(manifest.ift_reviewers, manifest.test_reviewers) =
        partition_ids(std::move(reviewers), ift_size, seed);

    std::vector<std::string> queries(item_set.begin(), item_set.end());
    auto history_size = static_cast<std::size_t>(
        std::llround(history_ratio * static_cast<double>(queries.size())));
    history_size = std::clamp<std::size_t>(history_size, std::size_t{1},
                                           std::max<std::size_t>(queries.size() - 1, 1));
    // Distinct stream from the reviewer shuffle.
    std::tie(manifest.history_queries, manifest.alignment_queries) =
        partition_ids(std::move(queries), history_size, seed ^ 0x9e3779b97f4a7c15ULL);

    check_manifest_disjoint(manifest);
    return manifest;
}

void check_manifest_disjoint(const SplitManifest& manifest) {
    for (const auto& r : manifest.ift_reviewers) {
        if (manifest.test_reviewers.count(r))
            throw DataError("manifest reviewer partitions intersect at " + r);
    }
    for (const auto& q : manifest.history_queries) {
        if (manifest.alignment_queries.count(q))
            throw DataError("manifest query partitions intersect at " + q);
    }
}

Corpus filter_reviewers(const Corpus& corpus, int min_reviews) {
    if (min_reviews < 1) throw UsageError("min_reviews must be >= 1");
    std::map<std::string, int> counts;
    for (const Review& r : corpus.reviews) ++counts[r.reviewer_id];
    Corpus out;
    out.schema = corpus.schema;
    out.items = corpus.items;
    for (const Review& r : corpus.reviews) {
        if (counts[r.reviewer_id] >= min_reviews) out.reviews.push_back(r);
    }
    return out;
}

Corpus filter_by_length(const Corpus& corpus, std::int64_t max_words) {
    if (max_words <= 0) throw UsageError("max_words must be positive");
    Corpus out;
    out.schema = corpus.schema;
    std::set<std::string> removed;
    for (const auto& [id, item] : corpus.items) {
        if (item.word_count <= max_words) {
            out.items.emplace(id, item);
        } else {
            removed.insert(id);
        }
    }
    for (const Review& r : corpus.reviews) {
        if (!removed.count(r.item_id)) out.reviews.push_back(r);
    }
    return out;
}

Corpus apply_standard_filters(const Corpus& corpus, std::int64_t max_words, int min_reviews) {
    Corpus out = filter_reviewers(filter_by_length(corpus, max_words), min_reviews);
    std::map<std::string, int> counts;
    for (const Review& r : out.reviews) ++counts[r.reviewer_id];
    for (const auto& [reviewer, n] : counts) {
        if (n < min_reviews)
            throw DataError("filter postcondition violated for reviewer " + reviewer);
    }
    for (const auto& [id, item] : out.items) {
        if (item.word_count > max_words)
            throw DataError("filter postcondition violated for item " + id);
    }
    return out;
}

Corpus filter_for_examples(const Corpus& corpus, const SplitManifest& manifest, int min_history) {
    std::map<std::string, int> history_counts;
    std::map<std::string, int> alignment_counts;
    for (const Review& r : corpus.reviews) {
        if (manifest.history_queries.count(r.item_id)) ++history_counts[r.reviewer_id];
        if (manifest.alignment_queries.count(r.item_id)) ++alignment_counts[r.reviewer_id];
    }
    Corpus out;
    out.schema = corpus.schema;
    out.items = corpus.items;
    for (const Review& r : corpus.reviews) {
        if (history_counts[r.reviewer_id] >= min_history && alignment_counts[r.reviewer_id] >= 1)
            out.reviews.push_back(r);
    }
    return out;
}

std::vector<ReviewerProfile> build_profiles(const Corpus& corpus, const SplitManifest& manifest,
                                            int k, std::uint64_t seed) {
    if (k < 0) throw UsageError("K must be >= 0");
    std::map<std::string, std::vector<std::size_t>> history;
    for (std::size_t i = 0; i < corpus.reviews.size(); ++i) {
        const Review& r = corpus.reviews[i];
        if (manifest.history_queries.count(r.item_id)) history[r.reviewer_id].push_back(i);
    }

    std::set<std::string> reviewers;
    for (const Review& r : corpus.reviews) reviewers.insert(r.reviewer_id);

    std::vector<ReviewerProfile> profiles;
    profiles.reserve(reviewers.size());
    for (const std::string& reviewer : reviewers) {
        auto it = history.find(reviewer);
        std::size_t available = it == history.end() ? 0 : it->second.size();
        if (available < static_cast<std::size_t>(k))
            throw DataError("reviewer " + reviewer + " has only " + std::to_string(available) +
                            " history reviews, need " + std::to_string(k));

        ReviewerProfile profile;
        profile.reviewer_id = reviewer;
        if (k > 0) {
            // Sampling keyed on (seed, reviewer) so a profile is stable no
            // matter which other reviewers are present.
            std::vector<std::size_t> pool = it->second;
            std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
                return corpus.reviews[a].item_id < corpus.reviews[b].item_id;
            });
            std::mt19937_64 rng(seed ^ text::fnv1a64(reviewer));
            std::shuffle(pool.begin(), pool.end(), rng);
            pool.resize(static_cast<std::size_t>(k));
            for (std::size_t idx : pool) {
                const Review& r = corpus.reviews[idx];
                ProfileEntry entry;
                entry.item_id = r.item_id;
                if (const Item* item = corpus.find_item(r.item_id)) entry.body = item->body;
                entry.explanation = r.explanation;
                entry.score = r.score;
                profile.entries.push_back(std::move(entry));
            }
        }
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

void save_manifest(const SplitManifest& manifest, const std::filesystem::path& path) {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["seed"] = manifest.seed;
    doc["ift_reviewers"] = manifest.ift_reviewers;
    doc["test_reviewers"] = manifest.test_reviewers;
    doc["history_queries"] = manifest.history_queries;
    doc["alignment_queries"] = manifest.alignment_queries;
    jsonl::write_file(path, doc.dump(2) + "\n");
}

SplitManifest load_manifest(const std::filesystem::path& path) {
    json doc = json::parse(jsonl::read_file(path));
    SplitManifest manifest;
    manifest.seed = doc.at("seed").get<std::uint64_t>();
    auto read_set = [&](const char* key) {
        std::set<std::string> out;
        for (const auto& v : doc.at(key)) out.insert(v.get<std::string>());
        return out;
    };
    manifest.ift_reviewers = read_set("ift_reviewers");
    manifest.test_reviewers = read_set("test_reviewers");
    manifest.history_queries = read_set("history_queries");
    manifest.alignment_queries = read_set("alignment_queries");
    check_manifest_disjoint(manifest);
    return manifest;
}

void save_profiles(const std::vector<ReviewerProfile>& profiles,
                   const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const ReviewerProfile& p : profiles) {
        ordered_json record;
        record["reviewer_id"] = p.reviewer_id;
        ordered_json entries = ordered_json::array();
        for (const ProfileEntry& e : p.entries) {
            ordered_json entry;
            entry["item_id"] = e.item_id;
            entry["body"] = e.body;
            entry["explanation"] = e.explanation;
            if (e.score) entry["score"] = *e.score;
            entries.push_back(std::move(entry));
        }
        record["entries"] = std::move(entries);
        out.write(record);
    }
}

std::vector<ReviewerProfile> load_profiles(const std::filesystem::path& path) {
    std::vector<ReviewerProfile> profiles;
    jsonl::for_each_record(path, [&](std::size_t, const json& record) {
        ReviewerProfile profile;
        profile.reviewer_id = record.at("reviewer_id").get<std::string>();
        for (const auto& e : record.at("entries")) {
            ProfileEntry entry;
            entry.item_id = e.at("item_id").get<std::string>();
            entry.body = e.value("body", std::string{});
            entry.explanation = e.value("explanation", std::string{});
            if (e.contains("score")) entry.score = e["score"].get<int>();
            profile.entries.push_back(std::move(entry));
        }
        profiles.push_back(std::move(profile));
    });
    return profiles;
}

} // namespace prefeval
