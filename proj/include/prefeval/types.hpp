#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace prefeval {

enum class Provenance { raw, anonymized, summarized };

std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view name);

/// One open-ended generation (movie synopsis, story plot, book description).
struct Item {
    std::string item_id;
    std::string title;        // empty when absent; only the probe module reads it
    std::string body;
    std::int64_t word_count = 0;
    Provenance provenance = Provenance::raw;

    bool operator==(const Item&) const = default;
};

/// One reviewer's judgment of one item.
struct Review {
    std::string reviewer_id;
    std::string item_id;
    std::string explanation;
    int score = 0;

    bool operator==(const Review&) const = default;
};

/// A historical review shown in a prompt. `body` is the plot excerpt resolved
/// at profile-build time; pairwise profiles embed the whole previous
/// comparison in `explanation` and leave `body` and `score` empty.
struct ProfileEntry {
    std::string item_id;
    std::string body;
    std::string explanation;
    std::optional<int> score;

    bool operator==(const ProfileEntry&) const = default;
};

struct ReviewerProfile {
    std::string reviewer_id;
    std::vector<ProfileEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool operator==(const ReviewerProfile&) const = default;
};

enum class Aspect { Interestingness, Adaptability, Surprise, CharacterDevelopment, Ending };

/// Canonical presentation order (I, A, S, C, E).
inline constexpr std::array<Aspect, 5> kAllAspects = {
    Aspect::Interestingness, Aspect::Adaptability, Aspect::Surprise,
    Aspect::CharacterDevelopment, Aspect::Ending};

std::string_view aspect_name(Aspect a);
std::optional<Aspect> aspect_from_name(std::string_view name);

enum class PlotSide { A, B };

inline PlotSide opposite(PlotSide s) { return s == PlotSide::A ? PlotSide::B : PlotSide::A; }
inline char side_letter(PlotSide s) { return s == PlotSide::A ? 'A' : 'B'; }
std::optional<PlotSide> side_from_text(std::string_view text);

/// Inclusive integer rating range.
struct ScoreScale {
    int min = 1;
    int max = 10;

    bool contains(int s) const { return s >= min && s <= max; }
    bool operator==(const ScoreScale&) const = default;
};

/// Scalar evaluation example: judge one query item as one reviewer.
struct ScalarExample {
    std::string example_id;
    std::string reviewer_id;
    ReviewerProfile profile;
    Item query;
    int gold_score = 0;
    std::string gold_explanation;

    bool operator==(const ScalarExample&) const = default;
};

/// Pairwise evaluation example: pick per-aspect winners between two plots
/// generated from the same premise.
struct PairwiseExample {
    std::string example_id;
    std::string reviewer_id;
    std::string premise;
    Item plot_a;
    Item plot_b;
    std::map<Aspect, PlotSide> gold;
    ReviewerProfile profile;  // K = 1

    bool operator==(const PairwiseExample&) const = default;
};

/// Reviewer and query partitions for one experiment. Reviewers split into
/// instruction-tuning vs. held-out test; queries split into profile history
/// vs. alignment targets.
struct SplitManifest {
    std::uint64_t seed = 0;
    std::set<std::string> ift_reviewers;
    std::set<std::string> test_reviewers;
    std::set<std::string> history_queries;
    std::set<std::string> alignment_queries;

    bool operator==(const SplitManifest&) const = default;
};

} // namespace prefeval
