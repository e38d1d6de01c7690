// prefeval: personalized preference-evaluation harness CLI.
//
// One subcommand per pipeline stage: split, profiles, curate, export-ift,
// evaluate, baseline, metrics, probe, sweep-k, shuffle, report. Exit codes:
// 0 success, 1 usage error, 2 data error, 3 backend error.
#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "prefeval/baselines.hpp"
#include "prefeval/corpus.hpp"
#include "prefeval/curate.hpp"
#include "prefeval/drivers.hpp"
#include "prefeval/errors.hpp"
#include "prefeval/jsonl.hpp"
#include "prefeval/judge.hpp"
#include "prefeval/metrics.hpp"
#include "prefeval/probe.hpp"
#include "prefeval/prompt.hpp"
#include "prefeval/text.hpp"

using namespace prefeval;
using jsonl::json;
using jsonl::ordered_json;

namespace {

struct SharedIo {
    std::string reviews;
    std::string items;
    std::string manifest;
    int score_min = 1;
    int score_max = 10;
};

struct BackendFlags {
    std::string endpoint;
    std::string model;
    double temperature = 0.8;
    int max_tokens = 600;
    int max_retries = 3;
    int parallelism = 4;
    long timeout_s = 60;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
    cmd->add_option("--endpoint", flags.endpoint, "Chat-completion endpoint URL")->required();
    cmd->add_option("--model", flags.model, "Model name sent in the request body")->required();
    cmd->add_option("--temperature", flags.temperature, "Sampling temperature");
    cmd->add_option("--max-tokens", flags.max_tokens, "Maximum generated tokens");
    cmd->add_option("--max-retries", flags.max_retries, "Transport retries per request");
    cmd->add_option("--parallelism", flags.parallelism, "Maximum in-flight requests");
    cmd->add_option("--timeout", flags.timeout_s, "Per-request timeout in seconds");
}

judge::JudgeConfig to_config(const BackendFlags& flags) {
    judge::JudgeConfig config;
    config.endpoint_url = flags.endpoint;
    config.model_name = flags.model;
    config.temperature = flags.temperature;
    config.max_new_tokens = flags.max_tokens;
    config.max_retries = flags.max_retries;
    config.parallelism = flags.parallelism;
    config.timeout = std::chrono::seconds(flags.timeout_s);
    return config;
}

struct TemplateFlags {
    std::string scalar_path;
    std::string pairwise_path;
};

void add_template_flags(CLI::App* cmd, TemplateFlags& flags) {
    cmd->add_option("--scalar-template", flags.scalar_path,
                    "Scalar template file ({{profile}}, {{query}})");
    cmd->add_option("--pairwise-template", flags.pairwise_path,
                    "Pairwise template file ({{profile}}, {{premise}}, {{plot_a}}, "
                    "{{plot_b}}, {{questions}})");
}

prompt::TemplateSet resolve_templates(const TemplateFlags& flags) {
    prompt::TemplateSet templates = prompt::default_templates();
    if (!flags.scalar_path.empty())
        templates.scalar = prompt::load_template(flags.scalar_path, prompt::TaskKind::scalar);
    if (!flags.pairwise_path.empty())
        templates.pairwise =
            prompt::load_template(flags.pairwise_path, prompt::TaskKind::pairwise);
    return templates;
}

Corpus load_corpus_or_die(const SharedIo& io) {
    CorpusSchema schema;
    schema.scale = {io.score_min, io.score_max};
    auto report = load_corpus(io.reviews, schema, io.items.empty() ? "" : io.items);
    for (const auto& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
    if (!report.rejections.empty()) {
        std::cerr << report.rejections.size() << " records rejected:\n";
        for (const auto& r : report.rejections)
            std::cerr << "  line " << r.line << ": " << r.reason << "\n";
    }
    return std::move(report.corpus);
}

void write_manifest_for(const std::string& command, std::uint64_t seed,
                        const std::map<std::string, std::string>& config,
                        const std::vector<std::string>& inputs, const std::string& out) {
    drivers::RunManifest manifest;
    manifest.command = command;
    manifest.seed = seed;
    manifest.config = config;
    std::vector<std::filesystem::path> paths;
    for (const auto& input : inputs) {
        if (!input.empty()) paths.emplace_back(input);
    }
    drivers::write_run_manifest(manifest, paths, out + ".run.json");
}

ordered_json correlation_json(const metrics::CorrelationReport& report, bool degenerate) {
    ordered_json doc;
    doc["n"] = report.n;
    doc["pearson"] = {{"r", report.pearson.r}, {"p", report.pearson.p}};
    doc["spearman"] = {{"r", report.spearman.r}, {"p", report.spearman.p}};
    doc["kendall"] = {{"r", report.kendall.r}, {"p", report.kendall.p}};
    doc["degenerate"] = degenerate;
    return doc;
}

int run_split(const SharedIo& io, double ratio, double history_ratio, std::uint64_t seed,
              const std::string& out) {
    Corpus corpus = load_corpus_or_die(io);
    SplitManifest manifest = split_reviewers(corpus, ratio, seed, history_ratio);
    save_manifest(manifest, out);
    write_manifest_for("split", seed,
                       {{"ratio", std::to_string(ratio)},
                        {"history_ratio", std::to_string(history_ratio)}},
                       {io.reviews, io.items}, out);
    std::cout << "ift=" << manifest.ift_reviewers.size()
              << " test=" << manifest.test_reviewers.size()
              << " history=" << manifest.history_queries.size()
              << " alignment=" << manifest.alignment_queries.size() << "\n";
    return 0;
}

int run_profiles(const SharedIo& io, int k, std::uint64_t seed, const std::string& out) {
    Corpus corpus = load_corpus_or_die(io);
    SplitManifest manifest = load_manifest(io.manifest);
    Corpus usable = filter_for_examples(corpus, manifest, k);
    auto profiles = build_profiles(usable, manifest, k, seed);
    save_profiles(profiles, out);
    write_manifest_for("profiles", seed, {{"K", std::to_string(k)}},
                       {io.reviews, io.items, io.manifest}, out);
    std::cout << profiles.size() << " profiles written\n";
    return 0;
}

int run_curate_anonymize(const std::string& items_path, const BackendFlags& flags,
                         const std::string& out, const std::string& audit_path) {
    auto items = load_items(items_path);
    judge::HttpChatClient client(to_config(flags));
    std::vector<curate::AnonymizationAudit> audits;
    for (Item& item : items) {
        auto result = curate::extract_entity_map(item.body, client);
        item.body = curate::apply_anonymization(item.body, result.map);
        item.word_count = text::count_words(item.body);
        item.provenance = Provenance::anonymized;
        audits.push_back({item.item_id, result.map, result.retries});
    }
    save_items(items, out);
    if (!audit_path.empty()) curate::save_audit_log(audits, audit_path);
    write_manifest_for("curate-anonymize", 0, {{"items", items_path}}, {items_path}, out);
    std::cout << items.size() << " items anonymized\n";
    return 0;
}

int run_curate_summarize(const std::string& items_path, const BackendFlags& flags,
                         int target_words, const std::string& out) {
    auto items = load_items(items_path);
    judge::HttpChatClient client(to_config(flags));
    std::size_t no_ops = 0;
    for (Item& item : items) {
        auto result = curate::summarize(item.body, client, target_words);
        if (result.no_op) {
            ++no_ops;
        } else {
            item.body = result.text;
            item.word_count = result.output_words;
            item.provenance = Provenance::summarized;
        }
    }
    save_items(items, out);
    write_manifest_for("curate-summarize", 0,
                       {{"target_words", std::to_string(target_words)}}, {items_path}, out);
    std::cout << items.size() << " items processed (" << no_ops << " already short)\n";
    return 0;
}

int run_curate_enrich(const std::string& items_path, const BackendFlags& flags,
                      const std::string& out) {
    auto items = load_items(items_path);
    judge::HttpChatClient client(to_config(flags));
    for (Item& item : items) item = curate::enrich_with_description(item, client);
    save_items(items, out);
    std::cout << items.size() << " items enriched\n";
    return 0;
}

int run_curate_scalar(const SharedIo& io, int k, std::uint64_t seed, const std::string& out_ift,
                      const std::string& out_test) {
    Corpus corpus = load_corpus_or_die(io);
    SplitManifest manifest = load_manifest(io.manifest);
    Corpus usable = filter_for_examples(corpus, manifest, k);
    auto dataset = curate::build_scalar_dataset(usable, manifest, k, seed);
    if (!out_ift.empty()) {
        curate::save_scalar_examples(dataset.ift, out_ift);
        write_manifest_for("curate-scalar", seed, {{"K", std::to_string(k)}},
                           {io.reviews, io.items, io.manifest}, out_ift);
    }
    if (!out_test.empty()) curate::save_scalar_examples(dataset.test, out_test);
    std::cout << dataset.ift.size() << " ift examples, " << dataset.test.size()
              << " test examples\n";
    return 0;
}

int run_curate_pairwise(const std::string& annotations_path, const std::string& out) {
    auto annotations = curate::load_annotations(annotations_path);
    auto examples = curate::build_pairwise_dataset(annotations);
    curate::save_pairwise_examples(examples, out);
    write_manifest_for("curate-pairwise", 0, {}, {annotations_path}, out);
    std::cout << examples.size() << " pairwise examples\n";
    return 0;
}

int run_export_ift(const std::string& task, const std::string& examples_path,
                   const std::string& manifest_path, const TemplateFlags& template_flags,
                   const std::string& out) {
    SplitManifest manifest = load_manifest(manifest_path);
    prompt::TemplateSet templates = resolve_templates(template_flags);
    std::size_t written = 0;
    if (task == "scalar") {
        written = curate::export_ift(curate::load_scalar_examples(examples_path), manifest,
                                     templates, out);
    } else {
        written = curate::export_ift(curate::load_pairwise_examples(examples_path), manifest,
                                     templates, out);
    }
    write_manifest_for("export-ift", 0, {{"task", task}}, {examples_path, manifest_path}, out);
    std::cout << written << " instruction-tuning records written\n";
    return 0;
}

int run_evaluate(const std::string& task, const std::string& examples_path,
                 const BackendFlags& flags, const TemplateFlags& template_flags,
                 const std::string& out, const std::string& transcript_path, bool swap_plots) {
    prompt::TemplateSet templates = resolve_templates(template_flags);
    judge::HttpChatClient client(to_config(flags));
    judge::BatchOptions options;
    options.parallelism = flags.parallelism;
    std::optional<judge::TranscriptWriter> transcript;
    if (!transcript_path.empty()) {
        transcript.emplace(transcript_path);
        options.transcript = &*transcript;
    }

    jsonl::Writer writer(out);
    std::size_t failures = 0;
    if (task == "scalar") {
        auto examples = curate::load_scalar_examples(examples_path);
        auto result = judge::evaluate_scalar_batch(examples, client,
                                                   templates, options);
        failures = result.failure_count;
        for (const auto& entry : result.entries) {
            ordered_json doc;
            doc["example_id"] = entry.example_id;
            doc["request_id"] = entry.request_id;
            doc["failed"] = entry.failed;
            doc["parse_ok"] = entry.verdict.parse_ok;
            doc["score"] = entry.verdict.score;
            doc["explanation"] = entry.verdict.explanation;
            doc["raw"] = entry.verdict.raw;
            doc["reprompt_count"] = entry.reprompt_count;
            if (entry.failed) doc["error"] = entry.error;
            writer.write(doc);
        }
        for (const auto& id : result.failed_ids) std::cerr << "failed: " << id << "\n";
    } else {
        auto examples = curate::load_pairwise_examples(examples_path);
        auto result = judge::evaluate_pairwise_batch(examples, client,
                                                     templates, options,
                                                     swap_plots);
        failures = result.failure_count;
        for (const auto& entry : result.entries) {
            ordered_json doc;
            doc["example_id"] = entry.example_id;
            doc["request_id"] = entry.request_id;
            doc["failed"] = entry.failed;
            doc["parse_ok"] = entry.verdict.parse_ok;
            ordered_json winners = ordered_json::object();
            for (const auto& [aspect, side] : entry.verdict.winners)
                winners[std::string(aspect_name(aspect))] = std::string(1, side_letter(side));
            doc["winners"] = std::move(winners);
            doc["swapped"] = swap_plots;
            doc["raw"] = entry.verdict.raw;
            doc["reprompt_count"] = entry.reprompt_count;
            writer.write(doc);
        }
        for (const auto& id : result.failed_ids) std::cerr << "failed: " << id << "\n";
    }
    write_manifest_for("evaluate", 0, {{"task", task}, {"model", flags.model}},
                       {examples_path}, out);
    std::cout << writer.count() << " verdicts written, " << failures << " failures\n";
    return 0;
}

int run_baseline_avg(const std::string& examples_path, const std::string& out,
                     std::optional<double> fallback) {
    auto examples = curate::load_scalar_examples(examples_path);
    jsonl::Writer writer(out);
    for (const auto& ex : examples) {
        double prediction;
        if (ex.profile.entries.empty()) {
            if (!fallback)
                throw DataError("empty profile needs --fallback-mean: " + ex.example_id);
            prediction = *fallback;
        } else {
            prediction = baselines::reviewer_avg(ex.profile);
        }
        ordered_json doc;
        doc["example_id"] = ex.example_id;
        doc["prediction"] = prediction;
        writer.write(doc);
    }
    write_manifest_for("baseline-avg", 0, {}, {examples_path}, out);
    std::cout << writer.count() << " predictions written\n";
    return 0;
}

int run_baseline_mf(const SharedIo& io, const std::string& examples_path,
                    const baselines::MfHyper& hyper, const std::string& model_in,
                    const std::string& model_out, const std::string& out) {
    baselines::MfModel model;
    if (!model_in.empty()) {
        model = baselines::load_model(model_in);
    } else {
        if (io.reviews.empty()) throw UsageError("baseline mf needs --reviews or --model-in");
        Corpus corpus = load_corpus_or_die(io);
        std::vector<baselines::Rating> ratings;
        for (const Review& r : corpus.reviews)
            ratings.push_back({r.reviewer_id, r.item_id, static_cast<double>(r.score)});
        model = baselines::mf_fit(ratings, hyper, corpus.schema.scale);
        std::cout << "train RMSE " << model.epoch_rmse.back() << " after "
                  << model.epoch_rmse.size() << " epochs\n";
    }
    if (!model_out.empty()) baselines::save_model(model, model_out);
    if (examples_path.empty()) return 0;
    if (out.empty()) throw UsageError("baseline mf needs --out with --examples");

    auto examples = curate::load_scalar_examples(examples_path);
    jsonl::Writer writer(out);
    std::size_t skipped = 0;
    drivers::MfPredictor predictor(model);
    for (const auto& ex : examples) {
        try {
            auto prediction = predictor.predict(ex.profile, ex.query);
            ordered_json doc;
            doc["example_id"] = ex.example_id;
            doc["prediction"] = *prediction;
            writer.write(doc);
        } catch (const DataError& e) {
            std::cerr << "skipped " << ex.example_id << ": " << e.what() << "\n";
            ++skipped;
        }
    }
    write_manifest_for("baseline-mf", hyper.seed, {{"dim", std::to_string(hyper.dim)}},
                       {examples_path}, out);
    std::cout << writer.count() << " predictions written, " << skipped << " skipped\n";
    return 0;
}

std::map<std::string, double> load_predictions(const std::string& path) {
    std::map<std::string, double> predictions;
    jsonl::for_each_record(path, [&](std::size_t, const json& doc) {
        std::string id = doc.at("example_id").get<std::string>();
        if (doc.contains("failed") && doc["failed"].get<bool>()) return;
        if (doc.contains("prediction")) {
            predictions[id] = doc["prediction"].get<double>();
        } else if (doc.contains("parse_ok") && doc["parse_ok"].get<bool>()) {
            predictions[id] = doc.at("score").get<double>();
        }
    });
    return predictions;
}

std::vector<judge::PairwiseVerdict> load_pairwise_verdicts(
    const std::string& path, const std::vector<PairwiseExample>& examples) {
    std::map<std::string, judge::PairwiseVerdict> by_id;
    jsonl::for_each_record(path, [&](std::size_t, const json& doc) {
        judge::PairwiseVerdict verdict;
        verdict.parse_ok = doc.value("parse_ok", false);
        if (doc.contains("winners")) {
            for (const auto& [name, value] : doc["winners"].items()) {
                auto aspect = aspect_from_name(name);
                auto side = side_from_text(value.get<std::string>());
                if (aspect && side) verdict.winners[*aspect] = *side;
            }
        }
        by_id[doc.at("example_id").get<std::string>()] = std::move(verdict);
    });
    std::vector<judge::PairwiseVerdict> verdicts;
    for (const auto& ex : examples) verdicts.push_back(by_id[ex.example_id]);
    return verdicts;
}

int run_metrics_scalar(const std::string& verdicts_path, const std::string& examples_path,
                       const std::string& probe_cache, const std::string& out, bool text) {
    auto examples = curate::load_scalar_examples(examples_path);
    auto predictions = load_predictions(verdicts_path);
    std::vector<double> preds, golds;
    std::vector<const ScalarExample*> scored;
    for (const auto& ex : examples) {
        auto it = predictions.find(ex.example_id);
        if (it == predictions.end()) continue;
        preds.push_back(it->second);
        golds.push_back(static_cast<double>(ex.gold_score));
        scored.push_back(&ex);
    }
    if (preds.size() < 2) throw DataError("fewer than 2 scored examples");

    ordered_json doc;
    doc["task"] = "scalar";
    doc["n_examples"] = examples.size();
    doc["n_scored"] = preds.size();
    bool degenerate = false;
    metrics::CorrelationReport report;
    try {
        report = metrics::correlate(preds, golds);
    } catch (const DataError&) {
        degenerate = true;
        report.n = preds.size();
    }
    doc["correlation"] = correlation_json(report, degenerate);

    if (!probe_cache.empty()) {
        std::map<std::string, bool> memorized_items;
        for (const auto& record : probe::load_probe_cache(probe_cache))
            memorized_items[record.item_id] = record.memorized;
        std::vector<bool> memorized;
        for (const ScalarExample* ex : scored) {
            auto it = memorized_items.find(ex->query.item_id);
            if (it == memorized_items.end())
                throw DataError("unprobed item in examples: " + ex->query.item_id);
            memorized.push_back(it->second);
        }
        ordered_json groups = ordered_json::object();
        for (const auto& [is_memorized, group] :
             probe::scalar_contamination_report(preds, golds, memorized)) {
            ordered_json cell;
            cell["n"] = group.n;
            cell["percent"] = group.percent;
            if (group.correlation) {
                cell["correlation"] = correlation_json(*group.correlation, false);
            } else {
                cell["notice"] = group.notice;
            }
            groups[is_memorized ? "memorized" : "unmemorized"] = std::move(cell);
        }
        doc["memorization_groups"] = std::move(groups);
    }

    jsonl::write_file(out, doc.dump(2) + "\n");
    write_manifest_for("metrics", 0, {{"task", "scalar"}},
                       {verdicts_path, examples_path, probe_cache}, out);
    if (text) std::cout << metrics::render_correlation_text(report, "scalar") << "\n";
    std::cout << "report written to " << out << "\n";
    return 0;
}

int run_metrics_pairwise(const std::string& verdicts_path, const std::string& examples_path,
                         const std::string& swapped_path, const std::string& probe_cache,
                         const std::string& out, bool text, bool lenient) {
    auto examples = curate::load_pairwise_examples(examples_path);
    auto verdicts = load_pairwise_verdicts(verdicts_path, examples);
    std::vector<std::map<Aspect, PlotSide>> golds;
    for (const auto& ex : examples) golds.push_back(ex.gold);

    auto accuracy = metrics::aspect_accuracy(verdicts, golds,
                                             lenient ? metrics::AccuracyMode::lenient
                                                     : metrics::AccuracyMode::strict);
    ordered_json doc;
    doc["task"] = "pairwise";
    doc["n_examples"] = examples.size();
    ordered_json per_aspect = ordered_json::object();
    for (Aspect a : kAllAspects) {
        ordered_json cell;
        cell["n"] = accuracy.counts.at(a);
        if (accuracy.per_aspect.count(a)) cell["accuracy"] = accuracy.per_aspect.at(a);
        per_aspect[std::string(aspect_name(a))] = std::move(cell);
    }
    doc["per_aspect"] = std::move(per_aspect);
    doc["average_accuracy"] = accuracy.average;
    doc["position_bias"] = metrics::position_bias(verdicts, golds);

    probe::PairwiseJudgments judgments;
    judgments.originals = verdicts;
    judgments.golds = golds;
    if (!swapped_path.empty()) {
        judgments.swapped = load_pairwise_verdicts(swapped_path, examples);
        doc["consistency"] = metrics::consistency_rate(verdicts, judgments.swapped);
    }

    if (!probe_cache.empty()) {
        auto records = probe::load_probe_cache(probe_cache);
        auto grouping = probe::group_pairs_by_memorization(examples, records);
        ordered_json groups = ordered_json::object();
        for (const auto& [group, report] :
             probe::pairwise_contamination_report(judgments, grouping)) {
            ordered_json cell;
            cell["n"] = report.n;
            cell["percent"] = report.percent;
            cell["accuracy"] = report.accuracy;
            if (!judgments.swapped.empty()) cell["consistency"] = report.consistency;
            cell["bias_first"] = report.bias_first;
            if (report.bias_memorized) cell["bias_memorized"] = *report.bias_memorized;
            groups[std::string(probe::group_name(group))] = std::move(cell);
        }
        doc["memorization_groups"] = std::move(groups);
    }

    jsonl::write_file(out, doc.dump(2) + "\n");
    write_manifest_for("metrics", 0, {{"task", "pairwise"}},
                       {verdicts_path, examples_path, swapped_path, probe_cache}, out);
    if (text) std::cout << metrics::render_aspect_accuracy_text(accuracy);
    std::cout << "report written to " << out << "\n";
    return 0;
}

int run_probe(const std::string& items_path, const BackendFlags& flags,
              const std::string& cache_path) {
    auto items = load_items(items_path);
    std::vector<probe::MemorizationRecord> records;
    std::set<std::string> cached;
    if (std::filesystem::exists(cache_path)) {
        records = probe::load_probe_cache(cache_path);
        for (const auto& r : records) cached.insert(r.item_id);
    }
    judge::HttpChatClient client(to_config(flags));
    std::size_t probed = 0;
    for (const Item& item : items) {
        if (cached.count(item.item_id)) continue;
        records.push_back(probe::probe_memorization(item, client));
        ++probed;
    }
    probe::save_probe_cache(records, cache_path);
    write_manifest_for("probe", 0, {{"items", items_path}}, {items_path}, cache_path);
    std::size_t memorized = 0;
    for (const auto& r : records) memorized += r.memorized ? 1 : 0;
    std::cout << probed << " newly probed, " << records.size() << " cached total, "
              << memorized << " memorized\n";
    return 0;
}

int run_sweep(const SharedIo& io, const std::vector<int>& ks, const std::string& predictor_kind,
              std::uint64_t seed, const std::string& out, bool include_ift) {
    Corpus corpus = load_corpus_or_die(io);
    SplitManifest manifest = load_manifest(io.manifest);

    std::vector<drivers::SweepRow> rows;
    if (predictor_kind == "avg") {
        drivers::ReviewerAvgPredictor predictor(corpus.mean_score());
        rows = drivers::sweep_profile_size(corpus, manifest, ks, predictor, seed, include_ift);
    } else {
        throw UsageError("unknown predictor: " + predictor_kind + " (expected avg)");
    }
    drivers::write_sweep_csv(rows, out);
    write_manifest_for("sweep-k", seed, {{"predictor", predictor_kind}},
                       {io.reviews, io.items, io.manifest}, out);
    for (const auto& row : rows) {
        std::cout << "K=" << row.k << " kendall=" << row.eval.report.kendall.r
                  << (row.eval.degenerate ? " (degenerate)" : "") << "\n";
    }
    return 0;
}

int run_shuffle(const SharedIo& io, int k, int trials, const std::string& predictor_kind,
                std::uint64_t seed, const std::string& out) {
    Corpus corpus = load_corpus_or_die(io);
    SplitManifest manifest = load_manifest(io.manifest);
    Corpus usable = filter_for_examples(corpus, manifest, k);
    auto dataset = curate::build_scalar_dataset(usable, manifest, k, seed);
    if (dataset.test.empty()) throw DataError("no test examples for shuffle");

    std::vector<drivers::ShuffleRow> rows;
    if (predictor_kind == "avg") {
        drivers::ReviewerAvgPredictor predictor(corpus.mean_score());
        rows.push_back(drivers::shuffle_trials(dataset.test, predictor, trials, seed));
    } else {
        throw UsageError("unknown predictor: " + predictor_kind + " (expected avg)");
    }
    drivers::write_shuffle_csv(rows, out);
    write_manifest_for("shuffle", seed,
                       {{"K", std::to_string(k)}, {"trials", std::to_string(trials)}},
                       {io.reviews, io.items, io.manifest}, out);
    for (const auto& row : rows)
        std::cout << row.predictor << ": mean=" << row.kendall_mean
                  << " std=" << row.kendall_std << "\n";
    return 0;
}

int run_report(bool schema, const std::string& in) {
    if (schema) {
        std::cout << "sweep-k CSV columns:\n  " << drivers::sweep_csv_header() << "\n";
        std::cout << "shuffle CSV columns:\n  " << drivers::shuffle_csv_header() << "\n";
        std::cout << "scalar report JSON: {task, n_examples, n_scored, correlation:{n, "
                     "pearson:{r,p}, spearman:{r,p}, kendall:{r,p}, degenerate}}\n";
        std::cout << "pairwise report JSON: {task, n_examples, per_aspect:{<aspect>:{n, "
                     "accuracy}}, average_accuracy, position_bias, consistency?}\n";
        return 0;
    }
    if (in.empty()) throw UsageError("report needs --schema or --in <report.json>");
    json doc = json::parse(jsonl::read_file(in));
    if (doc.value("task", "") == "scalar") {
        const auto& c = doc.at("correlation");
        std::cout << "n=" << c.at("n") << "\n";
        for (const char* name : {"pearson", "spearman", "kendall"}) {
            std::cout << name << ": r=" << c.at(name).at("r").get<double>()
                      << " p=" << c.at(name).at("p").get<double>() << "\n";
        }
    } else {
        for (const auto& [aspect, cell] : doc.at("per_aspect").items()) {
            std::cout << aspect << ": ";
            if (cell.contains("accuracy")) {
                std::cout << cell.at("accuracy").get<double>();
            } else {
                std::cout << "n/a";
            }
            std::cout << " (n=" << cell.at("n").get<std::size_t>() << ")\n";
        }
        std::cout << "average: " << doc.at("average_accuracy").get<double>() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prefeval: personalized preference-evaluation harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; flags override it");

    SharedIo io;
    auto add_io = [&](CLI::App* cmd, bool need_manifest) {
        cmd->add_option("--reviews", io.reviews, "Review corpus JSONL")->required();
        cmd->add_option("--items", io.items, "Item bodies JSONL");
        if (need_manifest)
            cmd->add_option("--manifest", io.manifest, "Split manifest JSON")->required();
        cmd->add_option("--score-min", io.score_min, "Scale minimum");
        cmd->add_option("--score-max", io.score_max, "Scale maximum");
    };

    // split
    auto* split_cmd = app.add_subcommand("split", "Partition reviewers and queries");
    double ratio = 0.9, history_ratio = 0.8;
    std::uint64_t seed = 1;
    std::string out;
    add_io(split_cmd, false);
    split_cmd->add_option("--ratio", ratio, "Instruction-tuning reviewer share");
    split_cmd->add_option("--history-ratio", history_ratio, "History query share");
    split_cmd->add_option("--seed", seed, "Split seed");
    split_cmd->add_option("--out", out, "Output manifest path")->required();

    // profiles
    auto* profiles_cmd = app.add_subcommand("profiles", "Build reviewer profiles");
    int k = 3;
    add_io(profiles_cmd, true);
    profiles_cmd->add_option("-K,--history", k, "Profile size K");
    profiles_cmd->add_option("--seed", seed, "Sampling seed");
    profiles_cmd->add_option("--out", out, "Output profiles JSONL")->required();

    // curate
    auto* curate_cmd = app.add_subcommand("curate", "Dataset recreation and construction");
    curate_cmd->require_subcommand(1);
    BackendFlags backend;
    std::string items_path, audit_path, annotations_path, out_test;
    int target_words = 600;

    auto* anon_cmd = curate_cmd->add_subcommand("anonymize", "Replace character/location names");
    anon_cmd->add_option("--items", items_path, "Items JSONL")->required();
    add_backend_flags(anon_cmd, backend);
    anon_cmd->add_option("--out", out, "Output items JSONL")->required();
    anon_cmd->add_option("--audit", audit_path, "Anonymization audit log JSONL");

    auto* summ_cmd = curate_cmd->add_subcommand("summarize", "Summarize item bodies");
    summ_cmd->add_option("--items", items_path, "Items JSONL")->required();
    add_backend_flags(summ_cmd, backend);
    summ_cmd->add_option("--target-words", target_words, "Summary length target");
    summ_cmd->add_option("--out", out, "Output items JSONL")->required();

    auto* enrich_cmd =
        curate_cmd->add_subcommand("enrich", "Add descriptions to title-only items");
    enrich_cmd->add_option("--items", items_path, "Items JSONL")->required();
    add_backend_flags(enrich_cmd, backend);
    enrich_cmd->add_option("--out", out, "Output items JSONL")->required();

    auto* scalar_cmd = curate_cmd->add_subcommand("scalar", "Build scalar evaluation examples");
    add_io(scalar_cmd, true);
    scalar_cmd->add_option("-K,--history", k, "Profile size K");
    scalar_cmd->add_option("--seed", seed, "Sampling seed");
    scalar_cmd->add_option("--out-ift", out, "Instruction-tuning examples JSONL");
    scalar_cmd->add_option("--out-test", out_test, "Held-out examples JSONL");

    auto* pairwise_cmd = curate_cmd->add_subcommand("pairwise", "Build pairwise examples");
    pairwise_cmd->add_option("--annotations", annotations_path, "Raw annotations JSONL")
        ->required();
    pairwise_cmd->add_option("--out", out, "Output examples JSONL")->required();

    // export-ift
    auto* export_cmd = app.add_subcommand("export-ift", "Export instruction-tuning JSONL");
    std::string task = "scalar", examples_path, manifest_path;
    TemplateFlags template_flags;
    export_cmd->add_option("--task", task, "scalar|pairwise")
        ->check(CLI::IsMember({"scalar", "pairwise"}));
    export_cmd->add_option("--examples", examples_path, "Examples JSONL")->required();
    export_cmd->add_option("--manifest", manifest_path, "Split manifest JSON")->required();
    add_template_flags(export_cmd, template_flags);
    export_cmd->add_option("--out", out, "Output JSONL")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Run a judge over examples");
    std::string transcript_path;
    bool swap_plots = false;
    eval_cmd->add_option("--task", task, "scalar|pairwise")
        ->check(CLI::IsMember({"scalar", "pairwise"}));
    eval_cmd->add_option("--examples", examples_path, "Examples JSONL")->required();
    add_backend_flags(eval_cmd, backend);
    add_template_flags(eval_cmd, template_flags);
    eval_cmd->add_option("--out", out, "Verdicts JSONL")->required();
    eval_cmd->add_option("--transcript", transcript_path, "Request/response log JSONL");
    eval_cmd->add_flag("--swap", swap_plots, "Swap plot order (pairwise robustness runs)");

    // baseline
    auto* baseline_cmd = app.add_subcommand("baseline", "Non-LLM reference predictors");
    std::string kind = "avg", model_in, model_out;
    baselines::MfHyper hyper;
    std::optional<double> fallback_mean;
    baseline_cmd->add_option("--kind", kind, "avg|mf")->check(CLI::IsMember({"avg", "mf"}));
    baseline_cmd->add_option("--examples", examples_path, "Scalar examples JSONL");
    baseline_cmd->add_option("--out", out, "Predictions JSONL");
    baseline_cmd->add_option("--fallback-mean", fallback_mean,
                             "Prediction for empty profiles (avg)");
    baseline_cmd->add_option("--reviews", io.reviews, "Training reviews JSONL (mf)");
    baseline_cmd->add_option("--items", io.items, "Items JSONL");
    baseline_cmd->add_option("--score-min", io.score_min, "Scale minimum");
    baseline_cmd->add_option("--score-max", io.score_max, "Scale maximum");
    baseline_cmd->add_option("--model-in", model_in, "Load an MF checkpoint");
    baseline_cmd->add_option("--model-out", model_out, "Save the MF checkpoint");
    baseline_cmd->add_option("--dim", hyper.dim, "MF latent dimension");
    baseline_cmd->add_option("--lr", hyper.learning_rate, "MF learning rate");
    baseline_cmd->add_option("--lambda", hyper.regularization, "MF regularization");
    baseline_cmd->add_option("--epochs", hyper.epochs, "MF epochs");
    baseline_cmd->add_option("--seed", hyper.seed, "MF shuffle seed");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Score verdicts against gold labels");
    std::string verdicts_path, swapped_path;
    bool text_output = false, lenient = false;
    metrics_cmd->add_option("--task", task, "scalar|pairwise")
        ->check(CLI::IsMember({"scalar", "pairwise"}));
    metrics_cmd->add_option("--verdicts", verdicts_path, "Verdicts/predictions JSONL")
        ->required();
    metrics_cmd->add_option("--examples", examples_path, "Examples JSONL with gold labels")
        ->required();
    metrics_cmd->add_option("--swapped", swapped_path, "Swapped-order verdicts (consistency)");
    std::string probe_cache;
    metrics_cmd->add_option("--probe-cache", probe_cache,
                            "Memorization cache; adds per-group reports");
    metrics_cmd->add_option("--out", out, "Report JSON")->required();
    metrics_cmd->add_flag("--text", text_output, "Also print a text table");
    metrics_cmd->add_flag("--lenient", lenient,
                          "Exclude unparsed aspects instead of penalizing");

    // probe
    auto* probe_cmd = app.add_subcommand("probe", "Memorization probe with caching");
    std::string cache_path;
    probe_cmd->add_option("--items", items_path, "Items JSONL (with titles)")->required();
    add_backend_flags(probe_cmd, backend);
    probe_cmd->add_option("--cache", cache_path, "Memorization cache JSONL")->required();

    // sweep-k
    auto* sweep_cmd = app.add_subcommand("sweep-k", "Correlation across profile sizes");
    std::vector<int> ks{0, 1, 2, 3, 4, 5};
    std::string predictor_kind = "avg";
    bool include_ift = false;
    add_io(sweep_cmd, true);
    sweep_cmd->add_option("--k-values", ks, "Profile sizes to sweep")->delimiter(',');
    sweep_cmd->add_option("--predictor", predictor_kind, "avg");
    sweep_cmd->add_option("--seed", seed, "Profile sampling seed");
    sweep_cmd->add_flag("--include-ift", include_ift, "Evaluate ift examples too");
    sweep_cmd->add_option("--out", out, "Output CSV")->required();

    // shuffle
    auto* shuffle_cmd = app.add_subcommand("shuffle", "Profile-order robustness trials");
    int trials = 3;
    add_io(shuffle_cmd, true);
    shuffle_cmd->add_option("-K,--history", k, "Profile size K");
    shuffle_cmd->add_option("--trials", trials, "Number of shuffled reruns");
    shuffle_cmd->add_option("--predictor", predictor_kind, "avg");
    shuffle_cmd->add_option("--seed", seed, "Base seed");
    shuffle_cmd->add_option("--out", out, "Output CSV")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Describe or render report files");
    bool show_schema = false;
    std::string report_in;
    report_cmd->add_flag("--schema", show_schema, "Print output schemas");
    report_cmd->add_option("--in", report_in, "Report JSON to render");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (split_cmd->parsed()) return run_split(io, ratio, history_ratio, seed, out);
        if (profiles_cmd->parsed()) return run_profiles(io, k, seed, out);
        if (curate_cmd->parsed()) {
            if (anon_cmd->parsed())
                return run_curate_anonymize(items_path, backend, out, audit_path);
            if (summ_cmd->parsed())
                return run_curate_summarize(items_path, backend, target_words, out);
            if (enrich_cmd->parsed()) return run_curate_enrich(items_path, backend, out);
            if (scalar_cmd->parsed()) return run_curate_scalar(io, k, seed, out, out_test);
            if (pairwise_cmd->parsed()) return run_curate_pairwise(annotations_path, out);
        }
        if (export_cmd->parsed())
            return run_export_ift(task, examples_path, manifest_path, template_flags, out);
        if (eval_cmd->parsed())
            return run_evaluate(task, examples_path, backend, template_flags, out,
                                transcript_path, swap_plots);
        if (baseline_cmd->parsed()) {
            if (kind == "avg") return run_baseline_avg(examples_path, out, fallback_mean);
            return run_baseline_mf(io, examples_path, hyper, model_in, model_out, out);
        }
        if (metrics_cmd->parsed()) {
            if (task == "scalar")
                return run_metrics_scalar(verdicts_path, examples_path, probe_cache, out,
                                          text_output);
            return run_metrics_pairwise(verdicts_path, examples_path, swapped_path, probe_cache,
                                        out, text_output, lenient);
        }
        if (probe_cmd->parsed()) return run_probe(items_path, backend, cache_path);
        if (sweep_cmd->parsed()) return run_sweep(io, ks, predictor_kind, seed, out, include_ift);
        if (shuffle_cmd->parsed()) return run_shuffle(io, k, trials, predictor_kind, seed, out);
        if (report_cmd->parsed()) return run_report(show_schema, report_in);
        throw UsageError("no subcommand");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
