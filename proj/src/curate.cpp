#include "prefeval/curate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "prefeval/errors.hpp"
#include "prefeval/jsonl.hpp"
#include "prefeval/prompt.hpp"
#include "prefeval/text.hpp"

namespace prefeval::curate {

using jsonl::json;
using jsonl::ordered_json;

// ---------------------------------------------------------------------------
// Name maps and anonymization
// ---------------------------------------------------------------------------

void validate_name_map(const NameMap& map) {
    std::set<std::string> originals, replacements;
    for (const auto& [original, replacement] : map.entries) {
        if (original.empty() || replacement.empty())
            throw DataError("name map entry with empty name");
        if (!originals.insert(original).second)
            throw DataError("duplicate original in name map: " + original);
        if (!replacements.insert(replacement).second)
            throw DataError("duplicate replacement in name map: " + replacement);
    }
    for (const auto& [original, _] : map.entries) {
        for (const auto& [__, replacement] : map.entries) {
            if (text::contains_whole_word(original, replacement))
                throw DataError("replacement \"" + replacement +
                                "\" occurs inside original \"" + original + "\"");
        }
    }
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        for (std::size_t j = i + 1; j < map.entries.size(); ++j) {
            if (text::family_name(map.entries[i].first) ==
                    text::family_name(map.entries[j].first) &&
                text::family_name(map.entries[i].second) !=
                    text::family_name(map.entries[j].second)) {
                throw DataError("family-name coherence violated for \"" +
                                map.entries[i].first + "\" and \"" + map.entries[j].first + "\"");
            }
        }
    }
}

namespace {

std::string replace_family_name(const std::string& name, std::string_view family) {
    std::string_view current = text::family_name(name);
    std::string out(name);
    out.replace(out.size() - current.size(), current.size(), family);
    return out;
}

} // namespace

NameMap repair_family_names(NameMap map) {
    // First replacement's family name wins within each original-family group.
    std::map<std::string, std::string> family_to_replacement;
    for (auto& [original, replacement] : map.entries) {
        std::string family(text::family_name(original));
        auto it = family_to_replacement.find(family);
        if (it == family_to_replacement.end()) {
            family_to_replacement.emplace(family, std::string(text::family_name(replacement)));
        } else if (text::family_name(replacement) != it->second) {
            replacement = replace_family_name(replacement, it->second);
        }
    }
    validate_name_map(map);
    return map;
}

std::string apply_anonymization(const std::string& body, const NameMap& map) {
    if (map.empty()) return body;
    validate_name_map(map);

    std::vector<std::pair<std::string, std::string>> ordered = map.entries;
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return a.first.size() > b.first.size();
    });

    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        bool replaced = false;
        for (const auto& [original, replacement] : ordered) {
            if (body.compare(i, original.size(), original) == 0 &&
                text::is_whole_word(body, i, original.size())) {
                out += replacement;
                i += original.size();
                replaced = true;
                break;
            }
        }
        if (!replaced) {
            out.push_back(body[i]);
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Backend-driven curation
// ---------------------------------------------------------------------------

namespace {

std::string entity_prompt(const std::string& body) {
    return "Identify every character name and location name in the plot below. "
           "Invent a new name for each one; names that share a family name must "
           "keep sharing one invented family name. Respond with only a JSON "
           "object that maps each original name to its replacement. Respond "
           "with {} if there are no names.\n\nPlot:\n" +
           body + "\n";
}

NameMap parse_entity_json(const std::string& raw) {
    // Models often wrap the object in prose; take the outermost braces.
    std::size_t open = raw.find('{');
    std::size_t close = raw.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw DataError("no JSON object in response");
    json doc = json::parse(raw.substr(open, close - open + 1), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("invalid JSON mapping");
    NameMap map;
    for (const auto& [original, replacement] : doc.items()) {
        if (!replacement.is_string()) throw DataError("non-string replacement in mapping");
        std::string from(text::trim(original));
        std::string to(text::trim(replacement.get<std::string>()));
        if (from.empty() || to.empty()) throw DataError("empty name in mapping");
        map.entries.emplace_back(std::move(from), std::move(to));
    }
    return map;
}

bool looks_like_refusal(const std::string& response) {
    std::string lowered = text::to_lower(text::trim(response));
    static const char* kPrefixes[] = {"i cannot", "i can't", "i'm sorry", "i am sorry",
                                      "sorry,", "as an ai"};
    for (const char* prefix : kPrefixes) {
        if (lowered.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

} // namespace

EntityMapResult extract_entity_map(const std::string& body, judge::ChatBackend& backend,
                                   int max_attempts, std::chrono::milliseconds backoff_initial) {
    if (body.empty()) throw DataError("extract_entity_map: empty body");
    if (max_attempts < 1) throw UsageError("max_attempts must be >= 1");

    const std::string request = entity_prompt(body);
    std::string last_error;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(backoff_initial * (1LL << (attempt - 1)));
        judge::ChatResult completion =
            backend.complete({request, std::nullopt, std::nullopt});
        try {
            NameMap map = parse_entity_json(completion.text);
            try {
                validate_name_map(map);
            } catch (const DataError&) {
                map = repair_family_names(std::move(map));
            }
            return {std::move(map), attempt};
        } catch (const DataError& e) {
            last_error = e.what();
        }
    }
    throw BackendError("entity map invalid after " + std::to_string(max_attempts) +
                       " attempts: " + last_error);
}

SummaryResult summarize(const std::string& body, judge::ChatBackend& backend, int target_words) {
    if (target_words <= 0) throw UsageError("target_words must be positive");

    SummaryResult result;
    result.input_words = text::count_words(body);
    if (result.input_words <= target_words) {
        result.text = body;
        result.output_words = result.input_words;
        result.no_op = true;
        return result;
    }

    std::string request =
        "Summarize the plot below in at most " + std::to_string(target_words) +
        " words. Omit incidental details but keep the main storyline, the named "
        "characters and the ending.\n\nPlot:\n" + body + "\n";
    judge::ChatResult completion = backend.complete({request, std::nullopt, std::nullopt});
    result.text = std::string(text::trim(completion.text));
    result.output_words = text::count_words(result.text);
    if (result.text.empty()) throw BackendError("empty summary");
    if (result.output_words >= result.input_words)
        throw BackendError("summary is not shorter than the input");
    return result;
}

Item enrich_with_description(const Item& item, judge::ChatBackend& backend) {
    if (item.title.empty()) throw DataError("enrich_with_description: item has no title");
    if (!item.body.empty()) return item;  // idempotent no-op

    std::string request = "Write a brief, factual description (3-5 sentences) of the book "
                          "titled \"" + item.title + "\".";
    judge::ChatResult completion = backend.complete({request, std::nullopt, std::nullopt});
    std::string description(text::trim(completion.text));
    if (description.empty() || looks_like_refusal(description))
        throw BackendError("description unavailable for \"" + item.title + "\"");

    Item out = item;
    out.body = std::move(description);
    out.word_count = text::count_words(out.body);
    return out;
}

// ---------------------------------------------------------------------------
// Dataset construction
// ---------------------------------------------------------------------------

ScalarDataset build_scalar_dataset(const Corpus& corpus, const SplitManifest& manifest, int k,
                                   std::uint64_t seed) {
    std::vector<ReviewerProfile> profiles = build_profiles(corpus, manifest, k, seed);
    std::map<std::string, const ReviewerProfile*> by_reviewer;
    for (const ReviewerProfile& p : profiles) by_reviewer[p.reviewer_id] = &p;

    ScalarDataset dataset;
    for (const Review& review : corpus.reviews) {
        if (!manifest.alignment_queries.count(review.item_id)) continue;
        const ReviewerProfile* profile = by_reviewer.at(review.reviewer_id);

        ScalarExample example;
        example.example_id = review.reviewer_id + ":" + review.item_id;
        example.reviewer_id = review.reviewer_id;
        example.profile = *profile;
        if (const Item* item = corpus.find_item(review.item_id)) {
            example.query = *item;
        } else {
            example.query.item_id = review.item_id;
        }
        example.gold_score = review.score;
        example.gold_explanation = review.explanation;

        for (const ProfileEntry& entry : example.profile.entries) {
            if (entry.item_id == review.item_id)
                throw DataError("query leaked into profile for " + example.example_id);
        }

        if (manifest.test_reviewers.count(review.reviewer_id)) {
            dataset.test.push_back(std::move(example));
        } else {
            dataset.ift.push_back(std::move(example));
        }
    }
    auto by_id = [](const ScalarExample& a, const ScalarExample& b) {
        return a.example_id < b.example_id;
    };
    std::sort(dataset.ift.begin(), dataset.ift.end(), by_id);
    std::sort(dataset.test.begin(), dataset.test.end(), by_id);
    return dataset;
}

namespace {

/// Renders a past pairwise annotation as a profile entry body.
std::string render_annotation_block(const RawAnnotation& annotation,
                                    const std::map<Aspect, PlotSide>& gold) {
    std::ostringstream out;
    out << "Premise: " << annotation.premise << "\n";
    out << "Plot A: " << annotation.plot_a.body << "\n";
    out << "Plot B: " << annotation.plot_b.body << "\n";
    out << "Your answers:\n";
    for (Aspect a : kAllAspects) {
        auto it = gold.find(a);
        if (it != gold.end())
            out << aspect_name(a) << ": " << side_letter(it->second) << "\n";
    }
    return out.str();
}

} // namespace

std::vector<PairwiseExample> build_pairwise_dataset(
    const std::vector<RawAnnotation>& annotations) {
    struct Cleaned {
        const RawAnnotation* raw;
        std::map<Aspect, PlotSide> gold;
    };

    std::map<std::string, std::vector<Cleaned>> by_annotator;
    for (const RawAnnotation& annotation : annotations) {
        Cleaned cleaned{&annotation, {}};
        for (const auto& [aspect, answer] : annotation.answers) {
            std::string lowered = text::to_lower(text::trim(answer));
            if (lowered == "both" || lowered == "neither") continue;  // no preference shown
            auto side = side_from_text(answer);
            if (!side)
                throw DataError("unknown answer label \"" + answer + "\" in annotation " +
                                annotation.annotation_id);
            cleaned.gold[aspect] = *side;
        }
        if (cleaned.gold.empty()) continue;
        by_annotator[annotation.annotator_id].push_back(std::move(cleaned));
    }

    std::vector<PairwiseExample> examples;
    for (const auto& [annotator, cleaned] : by_annotator) {
        if (cleaned.size() < 2) continue;  // not enough annotations to form a profile
        for (std::size_t i = 0; i < cleaned.size(); ++i) {
            // Profile from the next annotation, cyclically, so no example's
            // profile refers to its own pair.
            const Cleaned& source = cleaned[(i + 1) % cleaned.size()];

            PairwiseExample example;
            example.example_id = cleaned[i].raw->annotation_id;
            example.reviewer_id = annotator;
            example.premise = cleaned[i].raw->premise;
            example.plot_a = cleaned[i].raw->plot_a;
            example.plot_b = cleaned[i].raw->plot_b;
            example.plot_a.word_count = text::count_words(example.plot_a.body);
            example.plot_b.word_count = text::count_words(example.plot_b.body);
            example.gold = cleaned[i].gold;

            ProfileEntry entry;
            entry.item_id = source.raw->annotation_id;
            entry.explanation = render_annotation_block(*source.raw, source.gold);
            example.profile.reviewer_id = annotator;
            example.profile.entries.push_back(std::move(entry));

            examples.push_back(std::move(example));
        }
    }
    std::sort(examples.begin(), examples.end(),
              [](const PairwiseExample& a, const PairwiseExample& b) {
                  return a.example_id < b.example_id;
              });
    return examples;
}

// ---------------------------------------------------------------------------
// Instruction-tuning export
// ---------------------------------------------------------------------------

std::string scalar_completion(const ScalarExample& example) {
    return "Review: " + example.gold_explanation + "\nScore: " +
           std::to_string(example.gold_score) + "\n";
}

std::string pairwise_completion(const PairwiseExample& example) {
    std::ostringstream out;
    for (Aspect a : kAllAspects) {
        auto it = example.gold.find(a);
        if (it != example.gold.end())
            out << aspect_name(a) << ": " << side_letter(it->second) << "\n";
    }
    return out.str();
}

namespace {

ordered_json ift_record_json(const IftRecord& record) {
    ordered_json doc;
    doc["prompt"] = record.prompt;
    doc["completion"] = record.completion;
    doc["reviewer_id"] = record.reviewer_id;
    doc["example_id"] = record.example_id;
    doc["task"] = record.task;
    return doc;
}

void check_no_leak(const std::string& reviewer_id, const SplitManifest& manifest) {
    if (manifest.test_reviewers.count(reviewer_id))
        throw DataError("leak: test reviewer " + reviewer_id + " in instruction-tuning export");
    if (!manifest.ift_reviewers.count(reviewer_id))
        throw DataError("reviewer " + reviewer_id + " is not in the ift partition");
}

} // namespace

std::size_t export_ift(const std::vector<ScalarExample>& examples, const SplitManifest& manifest,
                       const prompt::TemplateSet& templates, const std::filesystem::path& out_path,
                       ScoreScale scale) {
    for (const ScalarExample& ex : examples) check_no_leak(ex.reviewer_id, manifest);
    jsonl::Writer out(out_path);
    for (const ScalarExample& ex : examples) {
        IftRecord record;
        record.prompt = prompt::render_scalar_prompt(ex.profile, ex.query, templates.scalar, scale);
        record.completion = scalar_completion(ex);
        record.reviewer_id = ex.reviewer_id;
        record.example_id = ex.example_id;
        record.task = "scalar";
        out.write(ift_record_json(record));
    }
    return out.count();
}

std::size_t export_ift(const std::vector<PairwiseExample>& examples,
                       const SplitManifest& manifest, const prompt::TemplateSet& templates,
                       const std::filesystem::path& out_path) {
    for (const PairwiseExample& ex : examples) check_no_leak(ex.reviewer_id, manifest);
    jsonl::Writer out(out_path);
    for (const PairwiseExample& ex : examples) {
        std::vector<Aspect> aspects;
        for (Aspect a : kAllAspects) {
            if (ex.gold.count(a)) aspects.push_back(a);
        }
        IftRecord record;
        record.prompt = prompt::render_pairwise_prompt(ex.profile, ex.premise, ex.plot_a,
                                                       ex.plot_b, aspects, templates.pairwise);
        record.completion = pairwise_completion(ex);
        record.reviewer_id = ex.reviewer_id;
        record.example_id = ex.example_id;
        record.task = "pairwise";
        out.write(ift_record_json(record));
    }
    return out.count();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void save_audit_log(const std::vector<AnonymizationAudit>& audits,
                    const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const AnonymizationAudit& audit : audits) {
        ordered_json doc;
        doc["item_id"] = audit.item_id;
        ordered_json pairs = ordered_json::array();
        for (const auto& [original, replacement] : audit.map.entries)
            pairs.push_back(ordered_json::array({original, replacement}));
        doc["name_map"] = std::move(pairs);
        doc["retries"] = audit.retries;
        out.write(doc);
    }
}

namespace {

ordered_json profile_json(const ReviewerProfile& profile) {
    ordered_json doc;
    doc["reviewer_id"] = profile.reviewer_id;
    ordered_json entries = ordered_json::array();
    for (const ProfileEntry& e : profile.entries) {
        ordered_json entry;
        entry["item_id"] = e.item_id;
        entry["body"] = e.body;
        entry["explanation"] = e.explanation;
        if (e.score) entry["score"] = *e.score;
        entries.push_back(std::move(entry));
    }
    doc["entries"] = std::move(entries);
    return doc;
}

ReviewerProfile profile_from_json(const json& doc) {
    ReviewerProfile profile;
    profile.reviewer_id = doc.at("reviewer_id").get<std::string>();
    for (const auto& e : doc.at("entries")) {
        ProfileEntry entry;
        entry.item_id = e.at("item_id").get<std::string>();
        entry.body = e.value("body", std::string{});
        entry.explanation = e.value("explanation", std::string{});
        if (e.contains("score")) entry.score = e["score"].get<int>();
        profile.entries.push_back(std::move(entry));
    }
    return profile;
}

ordered_json item_json(const Item& item) {
    ordered_json doc;
    doc["item_id"] = item.item_id;
    if (!item.title.empty()) doc["title"] = item.title;
    doc["body"] = item.body;
    doc["provenance"] = std::string(provenance_name(item.provenance));
    return doc;
}

Item item_from_json(const json& doc) {
    Item item;
    item.item_id = doc.at("item_id").get<std::string>();
    if (doc.contains("title")) item.title = doc["title"].get<std::string>();
    item.body = doc.value("body", std::string{});
    if (doc.contains("provenance")) {
        if (auto p = provenance_from_name(doc["provenance"].get<std::string>())) item.provenance = *p;
    }
    item.word_count = text::count_words(item.body);
    return item;
}

} // namespace

void save_scalar_examples(const std::vector<ScalarExample>& examples,
                          const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const ScalarExample& ex : examples) {
        ordered_json doc;
        doc["example_id"] = ex.example_id;
        doc["reviewer_id"] = ex.reviewer_id;
        doc["profile"] = profile_json(ex.profile);
        doc["query"] = item_json(ex.query);
        doc["gold_score"] = ex.gold_score;
        doc["gold_explanation"] = ex.gold_explanation;
        out.write(doc);
    }
}

std::vector<ScalarExample> load_scalar_examples(const std::filesystem::path& path) {
    std::vector<ScalarExample> examples;
    jsonl::for_each_record(path, [&](std::size_t, const json& doc) {
        ScalarExample ex;
        ex.example_id = doc.at("example_id").get<std::string>();
        ex.reviewer_id = doc.at("reviewer_id").get<std::string>();
        ex.profile = profile_from_json(doc.at("profile"));
        ex.query = item_from_json(doc.at("query"));
        ex.gold_score = doc.at("gold_score").get<int>();
        ex.gold_explanation = doc.value("gold_explanation", std::string{});
        examples.push_back(std::move(ex));
    });
    return examples;
}

void save_pairwise_examples(const std::vector<PairwiseExample>& examples,
                            const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const PairwiseExample& ex : examples) {
        ordered_json doc;
        doc["example_id"] = ex.example_id;
        doc["reviewer_id"] = ex.reviewer_id;
        doc["premise"] = ex.premise;
        doc["plot_a"] = item_json(ex.plot_a);
        doc["plot_b"] = item_json(ex.plot_b);
        ordered_json gold;
        for (const auto& [aspect, side] : ex.gold)
            gold[std::string(aspect_name(aspect))] = std::string(1, side_letter(side));
        doc["gold"] = std::move(gold);
        doc["profile"] = profile_json(ex.profile);
        out.write(doc);
    }
}

std::vector<PairwiseExample> load_pairwise_examples(const std::filesystem::path& path) {
    std::vector<PairwiseExample> examples;
    jsonl::for_each_record(path, [&](std::size_t line, const json& doc) {
        PairwiseExample ex;
        ex.example_id = doc.at("example_id").get<std::string>();
        ex.reviewer_id = doc.at("reviewer_id").get<std::string>();
        ex.premise = doc.value("premise", std::string{});
        ex.plot_a = item_from_json(doc.at("plot_a"));
        ex.plot_b = item_from_json(doc.at("plot_b"));
        for (const auto& [name, value] : doc.at("gold").items()) {
            auto aspect = aspect_from_name(name);
            auto side = side_from_text(value.get<std::string>());
            if (!aspect || !side)
                throw DataError(path.string() + ":" + std::to_string(line) +
                                ": bad gold entry " + name);
            ex.gold[*aspect] = *side;
        }
        ex.profile = profile_from_json(doc.at("profile"));
        examples.push_back(std::move(ex));
    });
    return examples;
}

std::vector<RawAnnotation> load_annotations(const std::filesystem::path& path) {
    std::vector<RawAnnotation> annotations;
    jsonl::for_each_record(path, [&](std::size_t line, const json& doc) {
        RawAnnotation annotation;
        annotation.annotation_id = doc.at("annotation_id").get<std::string>();
        annotation.annotator_id = doc.at("annotator_id").get<std::string>();
        annotation.premise = doc.value("premise", std::string{});
        annotation.plot_a = item_from_json(doc.at("plot_a"));
        annotation.plot_b = item_from_json(doc.at("plot_b"));
        for (const auto& [name, value] : doc.at("answers").items()) {
            auto aspect = aspect_from_name(name);
            if (!aspect)
                throw DataError(path.string() + ":" + std::to_string(line) +
                                ": unknown aspect " + name);
            annotation.answers.emplace_back(*aspect, value.get<std::string>());
        }
        annotations.push_back(std::move(annotation));
    });
    return annotations;
}

} // namespace prefeval::curate
