#include "prefeval/probe.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "prefeval/errors.hpp"
#include "prefeval/jsonl.hpp"
#include "prefeval/text.hpp"

namespace prefeval::probe {

using jsonl::json;
using jsonl::ordered_json;

std::string normalize_title(std::string_view title) {
    std::vector<std::string> words = text::tokenize_words(title);
    static const std::set<std::string> kArticles = {"the", "a", "an"};
    // Leading then trailing article, never emptying the title ("The The").
    std::size_t begin = 0, end = words.size();
    if (end - begin > 1 && kArticles.count(words[begin])) ++begin;
    if (end - begin > 1 && kArticles.count(words[end - 1])) --end;
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += words[i];
    }
    return out;
}

MemorizationRecord probe_memorization(const Item& item, judge::ChatBackend& backend,
                                      const std::vector<std::string>& aliases) {
    if (item.title.empty()) throw DataError("probe_memorization: item has no gold title: " +
                                            item.item_id);
    std::string request =
        "The following is a plot synopsis of a published work. Name the work it "
        "comes from. Answer with the title only, nothing else.\n\nSynopsis:\n" +
        item.body + "\n";
    // Temperature 0 keeps the memorization label stable across runs.
    judge::ChatResult completion = backend.complete({request, 0.0, std::nullopt});

    MemorizationRecord record;
    record.item_id = item.item_id;
    record.provenance = item.provenance;
    record.predicted_title = std::string(text::trim(completion.text));

    std::string predicted = normalize_title(record.predicted_title);
    record.memorized = !predicted.empty() && predicted == normalize_title(item.title);
    for (const std::string& alias : aliases) {
        if (!record.memorized && !predicted.empty() && predicted == normalize_title(alias))
            record.memorized = true;
    }
    return record;
}

std::string_view group_name(MemorizationGroup g) {
    switch (g) {
    case MemorizationGroup::both: return "both";
    case MemorizationGroup::one: return "one";
    case MemorizationGroup::neither: return "neither";
    }
    return "neither";
}

PairGrouping group_pairs_by_memorization(const std::vector<PairwiseExample>& pairs,
                                         const std::vector<MemorizationRecord>& records) {
    std::map<std::string, bool> memorized;
    for (const MemorizationRecord& r : records) memorized[r.item_id] = r.memorized;

    auto lookup = [&](const std::string& item_id) {
        auto it = memorized.find(item_id);
        if (it == memorized.end()) throw DataError("unprobed item: " + item_id);
        return it->second;
    };

    PairGrouping grouping;
    for (MemorizationGroup g :
         {MemorizationGroup::both, MemorizationGroup::one, MemorizationGroup::neither}) {
        grouping.members[g] = {};
        grouping.shares[g] = 0.0;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        bool a = lookup(pairs[i].plot_a.item_id);
        bool b = lookup(pairs[i].plot_b.item_id);
        MemorizationGroup g = a && b   ? MemorizationGroup::both
                              : a || b ? MemorizationGroup::one
                                       : MemorizationGroup::neither;
        grouping.members[g].push_back(i);
        if (g == MemorizationGroup::one)
            grouping.memorized_side[i] = a ? PlotSide::A : PlotSide::B;
    }
    if (!pairs.empty()) {
        for (auto& [g, members] : grouping.members)
            grouping.shares[g] =
                static_cast<double>(members.size()) / static_cast<double>(pairs.size());
    }
    return grouping;
}

std::map<bool, ScalarGroupReport> scalar_contamination_report(
    const std::vector<double>& predictions, const std::vector<double>& golds,
    const std::vector<bool>& memorized) {
    if (predictions.size() != golds.size() || predictions.size() != memorized.size())
        throw DataError("scalar_contamination_report: length mismatch");

    std::map<bool, ScalarGroupReport> reports;
    for (bool group : {true, false}) {
        std::vector<double> p, g;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            if (memorized[i] == group) {
                p.push_back(predictions[i]);
                g.push_back(golds[i]);
            }
        }
        ScalarGroupReport report;
        report.n = p.size();
        report.percent = predictions.empty()
                             ? 0.0
                             : static_cast<double>(p.size()) /
                                   static_cast<double>(predictions.size());
        if (p.size() < 2) {
            report.notice = "skipped: fewer than 2 samples";
        } else {
            try {
                report.correlation = metrics::correlate(p, g);
            } catch (const DataError& e) {
                report.notice = std::string("skipped: ") + e.what();
            }
        }
        reports[group] = std::move(report);
    }
    return reports;
}

std::map<MemorizationGroup, metrics::PairBiasReport> pairwise_contamination_report(
    const PairwiseJudgments& judgments, const PairGrouping& grouping) {
    if (judgments.originals.size() != judgments.golds.size())
        throw DataError("pairwise_contamination_report: verdict/gold length mismatch");
    const bool has_swaps = !judgments.swapped.empty();
    if (has_swaps && judgments.swapped.size() != judgments.originals.size())
        throw DataError("pairwise_contamination_report: swapped length mismatch");

    std::size_t total = 0;
    for (const auto& [_, members] : grouping.members) total += members.size();

    std::map<MemorizationGroup, metrics::PairBiasReport> reports;
    for (const auto& [group, members] : grouping.members) {
        if (members.empty()) continue;

        std::vector<judge::PairwiseVerdict> originals, swapped;
        std::vector<std::map<Aspect, PlotSide>> golds;
        std::vector<PlotSide> memorized_side;
        for (std::size_t idx : members) {
            if (idx >= judgments.originals.size())
                throw DataError("pairwise_contamination_report: group index out of range");
            originals.push_back(judgments.originals[idx]);
            if (has_swaps) swapped.push_back(judgments.swapped[idx]);
            golds.push_back(judgments.golds[idx]);
            if (group == MemorizationGroup::one)
                memorized_side.push_back(grouping.memorized_side.at(idx));
        }

        metrics::PairBiasReport report;
        report.n = members.size();
        report.percent = total == 0 ? 0.0
                                    : static_cast<double>(members.size()) /
                                          static_cast<double>(total);
        // Pooled strict accuracy over (example, aspect) judgments.
        std::size_t correct_total = 0, judged_total = 0;
        for (std::size_t i = 0; i < originals.size(); ++i) {
            for (const auto& [aspect, side] : golds[i]) {
                ++judged_total;
                auto it = originals[i].winners.find(aspect);
                if (it != originals[i].winners.end() && it->second == side) ++correct_total;
            }
        }
        report.accuracy = judged_total == 0
                              ? 0.0
                              : static_cast<double>(correct_total) /
                                    static_cast<double>(judged_total);
        if (has_swaps) report.consistency = metrics::consistency_rate(originals, swapped);
        report.bias_first = metrics::position_bias(originals, golds);
        if (group == MemorizationGroup::one)
            report.bias_memorized = metrics::memorization_bias(originals, golds, memorized_side);
        reports[group] = std::move(report);
    }
    return reports;
}

void save_probe_cache(const std::vector<MemorizationRecord>& records,
                      const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const MemorizationRecord& r : records) {
        ordered_json doc;
        doc["item_id"] = r.item_id;
        doc["provenance"] = std::string(provenance_name(r.provenance));
        doc["predicted_title"] = r.predicted_title;
        doc["memorized"] = r.memorized;
        out.write(doc);
    }
}

std::vector<MemorizationRecord> load_probe_cache(const std::filesystem::path& path) {
    std::vector<MemorizationRecord> records;
    jsonl::for_each_record(path, [&](std::size_t, const json& doc) {
        MemorizationRecord r;
        r.item_id = doc.at("item_id").get<std::string>();
        if (auto p = provenance_from_name(doc.value("provenance", "raw"))) r.provenance = *p;
        r.predicted_title = doc.value("predicted_title", std::string{});
        r.memorized = doc.at("memorized").get<bool>();
        records.push_back(std::move(r));
    });
    return records;
}

} // namespace prefeval::probe
