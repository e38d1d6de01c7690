#include "prefeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "prefeval/corpus.hpp"
#include "prefeval/errors.hpp"
#include "prefeval/judge.hpp"
#include "prefeval/text.hpp"

namespace prefeval::metrics {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
    if (x.size() < 2) throw DataError("correlation needs at least 2 samples");
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double student_t_sf(double t, double dof) {
    boost::math::students_t_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, t));
}

/// (sum t(t-1)/2, sum t(t-1)(t-2), sum t(t-1)(2t+5)) over tied groups.
struct TieCounts {
    double pairs = 0.0;
    double triples = 0.0;
    double weighted = 0.0;
};

TieCounts count_ties(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    TieCounts out;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        double t = static_cast<double>(j - i);
        out.pairs += t * (t - 1.0) / 2.0;
        out.triples += t * (t - 1.0) * (t - 2.0);
        out.weighted += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    return out;
}

std::size_t merge_count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                   std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    std::size_t mid = lo + (hi - lo) / 2;
    std::size_t inv = merge_count_inversions(v, buf, lo, mid) +
                      merge_count_inversions(v, buf, mid, hi);
    std::size_t a = lo, b = mid, k = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            inv += mid - a;
            buf[k++] = v[b++];
        } else {
            buf[k++] = v[a++];
        }
    }
    while (a < mid) buf[k++] = v[a++];
    while (b < hi) buf[k++] = v[b++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
              buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

} // namespace

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    const std::size_t n = x.size();
    // Single-pass co-moment accumulation (Welford style).
    double mean_x = 0.0, mean_y = 0.0, m2x = 0.0, m2y = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double k = static_cast<double>(i + 1);
        double dx = x[i] - mean_x;
        double dy = y[i] - mean_y;
        mean_x += dx / k;
        mean_y += dy / k;
        m2x += dx * (x[i] - mean_x);
        m2y += dy * (y[i] - mean_y);
        cxy += dx * (y[i] - mean_y);
    }
    if (m2x == 0.0 || m2y == 0.0)
        throw DataError("correlation undefined: zero variance input");
    double r = cxy / std::sqrt(m2x * m2y);
    r = std::clamp(r, -1.0, 1.0);

    Correlation out;
    out.r = r;
    if (n > 2 && std::abs(r) < 1.0) {
        double dof = static_cast<double>(n - 2);
        double t = r * std::sqrt(dof / (1.0 - r * r));
        out.p = 2.0 * student_t_sf(std::abs(t), dof);
    } else {
        out.p = std::abs(r) >= 1.0 ? 0.0 : 1.0;
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        // Tied block occupies ranks i+1..j; all members get the mean.
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    Correlation base = pearson(rx, ry);

    Correlation out;
    out.r = base.r;
    const std::size_t n = x.size();
    if (n > 3 && std::abs(out.r) < 1.0) {
        // Fisher z normal approximation.
        double z = std::atanh(out.r) * std::sqrt((static_cast<double>(n) - 3.0) / 1.06);
        out.p = 2.0 * normal_sf(std::abs(z));
    } else {
        out.p = std::abs(out.r) >= 1.0 ? 0.0 : 1.0;
    }
    return out;
}

Correlation kendall(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    const std::size_t n = x.size();

    // Sort lexicographically by (x, y), then count discordant pairs as
    // mergesort inversions on y (Knight's algorithm).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];

    double joint_ties = 0.0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && x[order[j]] == x[order[i]] && y[order[j]] == y[order[i]]) ++j;
            double t = static_cast<double>(j - i);
            joint_ties += t * (t - 1.0) / 2.0;
            i = j;
        }
    }

    std::vector<double> buf(n);
    double dis = static_cast<double>(merge_count_inversions(ys, buf, 0, n));

    TieCounts tx = count_ties(std::vector<double>(x.begin(), x.end()));
    TieCounts ty = count_ties(std::vector<double>(y.begin(), y.end()));
    const double tot = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    if (tx.pairs == tot || ty.pairs == tot)
        throw DataError("kendall undefined: all-tied input");

    double s = tot - tx.pairs - ty.pairs + joint_ties - 2.0 * dis;
    double tau = s / std::sqrt((tot - tx.pairs) * (tot - ty.pairs));
    tau = std::clamp(tau, -1.0, 1.0);

    Correlation out;
    out.r = tau;
    double m = static_cast<double>(n) * (static_cast<double>(n) - 1.0);
    double var = (m * (2.0 * static_cast<double>(n) + 5.0) - tx.weighted - ty.weighted) / 18.0 +
                 (2.0 * tx.pairs * ty.pairs) / m;
    if (n > 2) var += tx.triples * ty.triples / (9.0 * m * (static_cast<double>(n) - 2.0));
    if (var > 0.0) {
        double z = s / std::sqrt(var);
        out.p = 2.0 * normal_sf(std::abs(z));
    } else {
        out.p = 1.0;
    }
    return out;
}

CorrelationReport correlate(std::span<const double> x, std::span<const double> y) {
    CorrelationReport report;
    report.pearson = pearson(x, y);
    report.spearman = spearman(x, y);
    report.kendall = kendall(x, y);
    report.n = x.size();
    return report;
}

AspectAccuracyReport aspect_accuracy(const std::vector<judge::PairwiseVerdict>& verdicts,
                                     const std::vector<std::map<Aspect, PlotSide>>& golds,
                                     AccuracyMode mode) {
    if (verdicts.size() != golds.size())
        throw DataError("aspect_accuracy: verdicts and golds differ in length");
    std::map<Aspect, std::size_t> correct;
    std::map<Aspect, std::size_t> total;
    for (Aspect a : kAllAspects) total[a] = 0;

    for (std::size_t i = 0; i < golds.size(); ++i) {
        for (const auto& [aspect, gold_side] : golds[i]) {
            auto it = verdicts[i].winners.find(aspect);
            if (it == verdicts[i].winners.end()) {
                if (mode == AccuracyMode::strict) ++total[aspect];
                continue;
            }
            ++total[aspect];
            if (it->second == gold_side) ++correct[aspect];
        }
    }

    AspectAccuracyReport report;
    double sum = 0.0;
    std::size_t present = 0;
    for (Aspect a : kAllAspects) {
        report.counts[a] = total[a];
        if (total[a] == 0) continue;
        double acc = static_cast<double>(correct[a]) / static_cast<double>(total[a]);
        report.per_aspect[a] = acc;
        sum += acc;
        ++present;
    }
    report.average = present == 0 ? 0.0 : sum / static_cast<double>(present);
    return report;
}

double win_rate(const judge::PairwiseVerdict& verdict) {
    if (verdict.winners.empty()) throw DataError("win_rate: no judged aspects");
    std::size_t a_wins = 0;
    for (const auto& [_, side] : verdict.winners) {
        if (side == PlotSide::A) ++a_wins;
    }
    return static_cast<double>(a_wins) / static_cast<double>(verdict.winners.size());
}

namespace {

std::map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                std::size_t n) {
    std::map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (std::size_t k = 0; k < n; ++k) {
            key += tokens[i + k];
            key += '\x1f';
        }
        ++counts[key];
    }
    return counts;
}

} // namespace

SimilarityScore explanation_similarity(std::string_view pred, std::string_view gold) {
    if (text::trim(pred).empty() || text::trim(gold).empty())
        throw DataError("explanation_similarity: empty text");

    std::vector<std::string> p = text::tokenize_words(pred);
    std::vector<std::string> g = text::tokenize_words(gold);
    if (p.empty() || g.empty()) throw DataError("explanation_similarity: no tokens");

    SimilarityScore score;

    // BLEU-4 with brevity penalty; unigram precision unsmoothed so disjoint
    // texts score 0, higher orders add-one smoothed so short reviews don't.
    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t n = 1; n <= 4; ++n) {
        auto pc = ngram_counts(p, n);
        auto gc = ngram_counts(g, n);
        double matched = 0.0;
        double total = 0.0;
        for (const auto& [key, count] : pc) {
            total += static_cast<double>(count);
            auto it = gc.find(key);
            if (it != gc.end()) matched += static_cast<double>(std::min(count, it->second));
        }
        double precision;
        if (n == 1) {
            precision = total > 0.0 ? matched / total : 0.0;
        } else {
            precision = (matched + 1.0) / (total + 1.0);
        }
        if (precision <= 0.0) {
            zero = true;
            break;
        }
        log_sum += std::log(precision) / 4.0;
    }
    if (!zero) {
        double bp = 1.0;
        if (p.size() < g.size())
            bp = std::exp(1.0 - static_cast<double>(g.size()) / static_cast<double>(p.size()));
        score.bleu = 100.0 * bp * std::exp(log_sum);
    }

    // ROUGE-1 F with clipped unigram matches.
    auto pc = ngram_counts(p, 1);
    auto gc = ngram_counts(g, 1);
    double matches = 0.0;
    for (const auto& [key, count] : pc) {
        auto it = gc.find(key);
        if (it != gc.end()) matches += static_cast<double>(std::min(count, it->second));
    }
    double precision = matches / static_cast<double>(p.size());
    double recall = matches / static_cast<double>(g.size());
    score.rouge1_f =
        (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return score;
}

int calibrate_score(int s, ScoreScale from, ScoreScale to) {
    if (!from.contains(s)) throw DataError("calibrate_score: score out of source range");
    double span_from = static_cast<double>(from.max - from.min);
    double span_to = static_cast<double>(to.max - to.min);
    double mapped = static_cast<double>(to.min) +
                    static_cast<double>(s - from.min) * span_to / span_from;
    return static_cast<int>(std::lround(mapped));
}

double consistency(const judge::PairwiseVerdict& original, const judge::PairwiseVerdict& swapped) {
    std::size_t shared = 0;
    std::size_t consistent = 0;
    for (const auto& [aspect, side] : original.winners) {
        auto it = swapped.winners.find(aspect);
        if (it == swapped.winners.end()) continue;
        ++shared;
        if (it->second == opposite(side)) ++consistent;
    }
    if (shared == 0) throw DataError("consistency: no shared aspects");
    return static_cast<double>(consistent) / static_cast<double>(shared);
}

double consistency_rate(const std::vector<judge::PairwiseVerdict>& originals,
                        const std::vector<judge::PairwiseVerdict>& swapped) {
    if (originals.size() != swapped.size())
        throw DataError("consistency_rate: length mismatch");
    std::size_t shared = 0;
    std::size_t consistent = 0;
    for (std::size_t i = 0; i < originals.size(); ++i) {
        for (const auto& [aspect, side] : originals[i].winners) {
            auto it = swapped[i].winners.find(aspect);
            if (it == swapped[i].winners.end()) continue;
            ++shared;
            if (it->second == opposite(side)) ++consistent;
        }
    }
    if (shared == 0) throw DataError("consistency_rate: no shared judgments");
    return static_cast<double>(consistent) / static_cast<double>(shared);
}

double position_bias(const std::vector<judge::PairwiseVerdict>& verdicts,
                     const std::vector<std::map<Aspect, PlotSide>>& golds) {
    if (verdicts.size() != golds.size()) throw DataError("position_bias: length mismatch");
    std::size_t judged = 0, judged_first = 0;
    std::size_t golded = 0, gold_first = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        for (const auto& [aspect, side] : verdicts[i].winners) {
            ++judged;
            if (side == PlotSide::A) ++judged_first;
            (void)aspect;
        }
        for (const auto& [aspect, side] : golds[i]) {
            ++golded;
            if (side == PlotSide::A) ++gold_first;
            (void)aspect;
        }
    }
    if (judged == 0 || golded == 0) throw DataError("position_bias: empty input");
    return static_cast<double>(judged_first) / static_cast<double>(judged) -
           static_cast<double>(gold_first) / static_cast<double>(golded);
}

double memorization_bias(const std::vector<judge::PairwiseVerdict>& verdicts,
                         const std::vector<std::map<Aspect, PlotSide>>& golds,
                         const std::vector<PlotSide>& memorized_side) {
    if (verdicts.size() != golds.size() || verdicts.size() != memorized_side.size())
        throw DataError("memorization_bias: length mismatch");
    std::size_t judged = 0, judged_mem = 0;
    std::size_t golded = 0, gold_mem = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        for (const auto& [_, side] : verdicts[i].winners) {
            ++judged;
            if (side == memorized_side[i]) ++judged_mem;
        }
        for (const auto& [_, side] : golds[i]) {
            ++golded;
            if (side == memorized_side[i]) ++gold_mem;
        }
    }
    if (judged == 0 || golded == 0) throw DataError("memorization_bias: empty input");
    return static_cast<double>(judged_mem) / static_cast<double>(judged) -
           static_cast<double>(gold_mem) / static_cast<double>(golded);
}

ScoreVarianceReport score_variance(const Corpus& corpus, const std::set<std::string>& query_ids) {
    auto grouped = corpus.by_item();
    ScoreVarianceReport report;
    double count_sum = 0.0, mean_sum = 0.0, std_sum = 0.0;
    for (const auto& [item_id, indices] : grouped) {
        if (!query_ids.empty() && !query_ids.count(item_id)) continue;
        if (indices.empty()) continue;
        double n = static_cast<double>(indices.size());
        double mean = 0.0;
        for (std::size_t idx : indices) mean += corpus.reviews[idx].score;
        mean /= n;
        double var = 0.0;
        for (std::size_t idx : indices) {
            double d = corpus.reviews[idx].score - mean;
            var += d * d;
        }
        var /= n;
        count_sum += n;
        mean_sum += mean;
        std_sum += std::sqrt(var);
        ++report.n_queries;
    }
    if (report.n_queries == 0) throw DataError("score_variance: no queries with reviews");
    double q = static_cast<double>(report.n_queries);
    report.review_count_mean = count_sum / q;
    report.score_mean = mean_sum / q;
    report.score_std = std_sum / q;
    return report;
}

std::string render_correlation_text(const CorrelationReport& report, std::string_view label) {
    std::ostringstream out;
    out << label << ": n=" << report.n;
    auto cell = [&](const char* name, const Correlation& c) {
        out << "  " << name << "=" << c.r << " (p=" << c.p << ")";
    };
    cell("pearson", report.pearson);
    cell("spearman", report.spearman);
    cell("kendall", report.kendall);
    return out.str();
}

std::string render_aspect_accuracy_text(const AspectAccuracyReport& report) {
    std::ostringstream out;
    for (Aspect a : kAllAspects) {
        auto it = report.per_aspect.find(a);
        out << aspect_name(a) << ": ";
        if (it == report.per_aspect.end()) {
            out << "n/a";
        } else {
            out << it->second;
        }
        out << " (n=" << report.counts.at(a) << ")\n";
    }
    out << "Average: " << report.average << "\n";
    return out.str();
}

} // namespace prefeval::metrics
