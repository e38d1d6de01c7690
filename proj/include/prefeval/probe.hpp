#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefeval/judge.hpp"
#include "prefeval/metrics.hpp"
#include "prefeval/types.hpp"

namespace prefeval::probe {

struct MemorizationRecord {
    std::string item_id;
    std::string predicted_title;
    bool memorized = false;
    Provenance provenance = Provenance::raw;
};

/// Case fold, strip punctuation, collapse whitespace, drop leading and
/// trailing articles ("The Matrix" and "Matrix, The" normalize identically).
/// Idempotent.
std::string normalize_title(std::string_view title);

/// Asks the backend (temperature 0) to name the work behind the item's body;
/// memorized = normalized match against the gold title or an alias. Throws
/// DataError when the item has no title.
MemorizationRecord probe_memorization(const Item& item, judge::ChatBackend& backend,
                                      const std::vector<std::string>& aliases = {});

enum class MemorizationGroup { both, one, neither };

std::string_view group_name(MemorizationGroup g);

struct PairGrouping {
    std::map<MemorizationGroup, std::vector<std::size_t>> members;  // indices into pairs
    std::map<MemorizationGroup, double> shares;                     // sum to 1
    /// Memorized side for every pair in the `one` group.
    std::map<std::size_t, PlotSide> memorized_side;
};

/// Partitions plot pairs by how many of their items the backend memorized.
/// Throws DataError for any unprobed item.
PairGrouping group_pairs_by_memorization(const std::vector<PairwiseExample>& pairs,
                                         const std::vector<MemorizationRecord>& records);

struct ScalarGroupReport {
    std::optional<metrics::CorrelationReport> correlation;  // absent when skipped
    double percent = 0.0;
    std::size_t n = 0;
    std::string notice;
};

/// Correlation suites within the memorized and un-memorized groups of scalar
/// predictions. Groups with fewer than 2 samples (or degenerate variance) are
/// skipped with a notice.
std::map<bool, ScalarGroupReport> scalar_contamination_report(
    const std::vector<double>& predictions, const std::vector<double>& golds,
    const std::vector<bool>& memorized);

struct PairwiseJudgments {
    std::vector<judge::PairwiseVerdict> originals;
    std::vector<judge::PairwiseVerdict> swapped;  // order-swapped reruns, aligned
    std::vector<std::map<Aspect, PlotSide>> golds;
};

/// Accuracy / consistency / position-bias suites within each memorization
/// group; the one-memorized group also carries the memorization bias. Groups
/// with no members are omitted.
std::map<MemorizationGroup, metrics::PairBiasReport> pairwise_contamination_report(
    const PairwiseJudgments& judgments, const PairGrouping& grouping);

void save_probe_cache(const std::vector<MemorizationRecord>& records,
                      const std::filesystem::path& path);
std::vector<MemorizationRecord> load_probe_cache(const std::filesystem::path& path);

} // namespace prefeval::probe
