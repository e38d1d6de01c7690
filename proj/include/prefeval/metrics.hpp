#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prefeval/types.hpp"

namespace prefeval {
struct Corpus;
namespace judge {
struct PairwiseVerdict;
}
} // namespace prefeval

namespace prefeval::metrics {

struct Correlation {
    double r = 0.0;
    double p = 1.0;

    bool operator==(const Correlation&) const = default;
};

struct CorrelationReport {
    Correlation pearson;
    Correlation spearman;
    Correlation kendall;
    std::size_t n = 0;

    bool operator==(const CorrelationReport&) const = default;
};

/// Sample Pearson correlation; two-sided p from a t-test with n-2 d.o.f.
/// Throws DataError for n < 2 or zero variance in either vector.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Pearson on average (mid) ranks; p via the Fisher z normal approximation.
Correlation spearman(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b with tie correction; p via the tie-adjusted normal
/// approximation. Throws DataError when either vector is all ties.
Correlation kendall(std::span<const double> x, std::span<const double> y);

CorrelationReport correlate(std::span<const double> x, std::span<const double> y);

/// Average (mid) ranks, 1-based; ties share the mean of their rank range.
std::vector<double> average_ranks(std::span<const double> v);

enum class AccuracyMode {
    strict,   // unparsed aspect counts as incorrect
    lenient,  // unparsed aspect excluded from the denominator
};

struct AspectAccuracyReport {
    std::map<Aspect, double> per_aspect;       // only aspects with n > 0
    std::map<Aspect, std::size_t> counts;      // n per aspect (0 allowed)
    double average = 0.0;                      // mean of present per_aspect values
};

/// Per-aspect accuracy over examples where gold defines the aspect, aligned
/// positionally (verdicts[i] answers golds[i]).
AspectAccuracyReport aspect_accuracy(const std::vector<judge::PairwiseVerdict>& verdicts,
                                     const std::vector<std::map<Aspect, PlotSide>>& golds,
                                     AccuracyMode mode = AccuracyMode::strict);

/// Fraction of judged aspects won by plot A. Throws DataError on empty winners.
double win_rate(const judge::PairwiseVerdict& verdict);

struct SimilarityScore {
    double bleu = 0.0;      // 0..100, 4-gram, add-one smoothing above unigrams
    double rouge1_f = 0.0;  // unigram F-measure
};

SimilarityScore explanation_similarity(std::string_view pred, std::string_view gold);

/// Endpoint-preserving monotone remap between integer scales,
/// s' = round(to.min + (s - from.min) * span_to / span_from).
int calibrate_score(int s, ScoreScale from = {1, 10}, ScoreScale to = {1, 5});

/// Per-aspect agreement between a verdict and its order-swapped rerun; an
/// aspect is consistent when the winner identity is preserved (original A
/// equals swapped B). Aspects missing from either verdict are excluded.
/// Throws DataError when no aspect is shared.
double consistency(const judge::PairwiseVerdict& original,
                   const judge::PairwiseVerdict& swapped);

/// Pooled consistency over (example, aspect) judgments.
double consistency_rate(const std::vector<judge::PairwiseVerdict>& originals,
                        const std::vector<judge::PairwiseVerdict>& swapped);

/// Excess preference for the first-positioned plot:
/// fraction(judged A) - fraction(gold A), pooled over judged aspects.
double position_bias(const std::vector<judge::PairwiseVerdict>& verdicts,
                     const std::vector<std::map<Aspect, PlotSide>>& golds);

/// Excess preference for the memorized plot: fraction(judge picks memorized
/// side) - fraction(memorized side gold-better). Every example must have
/// exactly one memorized side.
double memorization_bias(const std::vector<judge::PairwiseVerdict>& verdicts,
                         const std::vector<std::map<Aspect, PlotSide>>& golds,
                         const std::vector<PlotSide>& memorized_side);

struct PairBiasReport {
    double accuracy = 0.0;
    double consistency = 0.0;
    double bias_first = 0.0;
    std::optional<double> bias_memorized;
    double percent = 0.0;  // group share of all pairs
    std::size_t n = 0;
};

struct ScoreVarianceReport {
    double review_count_mean = 0.0;
    double score_mean = 0.0;
    double score_std = 0.0;  // per-query population std, averaged over queries
    std::size_t n_queries = 0;
};

/// Per-query reviewer counts and score moments averaged over the queries in
/// `query_ids` (all queries when empty). Throws DataError when no query has
/// reviews.
ScoreVarianceReport score_variance(const Corpus& corpus,
                                   const std::set<std::string>& query_ids = {});

std::string render_correlation_text(const CorrelationReport& report, std::string_view label);
std::string render_aspect_accuracy_text(const AspectAccuracyReport& report);

} // namespace prefeval::metrics
