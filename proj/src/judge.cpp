#include "prefeval/judge.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "prefeval/errors.hpp"
#include "prefeval/prompt.hpp"
#include "prefeval/text.hpp"

namespace prefeval::judge {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// HTTP client
// ---------------------------------------------------------------------------

struct HttpChatClient::Impl {
    JudgeConfig config;
    std::string origin;   // scheme://host[:port]
    std::string path;
    std::string api_key;
    std::atomic<std::uint64_t> next_request{1};

    std::string make_request_id() {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "req-%06llu",
                      static_cast<unsigned long long>(next_request.fetch_add(1)));
        return buf;
    }
};

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw UsageError("endpoint URL must start with http:// or https://: " + url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.rfind("https://", 0) == 0)
        throw UsageError("this build lacks TLS support; use an http endpoint or a local proxy");
#endif
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string extract_content(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw BackendError("non-JSON response body");
    try {
        const json& choices = doc.at("choices");
        if (choices.empty()) throw BackendError("response has no choices");
        const json& first = choices.at(0);
        if (first.contains("message")) return first.at("message").at("content").get<std::string>();
        return first.at("text").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what());
    }
}

} // namespace

HttpChatClient::HttpChatClient(JudgeConfig config) : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    std::tie(impl_->origin, impl_->path) = split_url(impl_->config.endpoint_url);
    for (const std::string& name : impl_->config.api_key_env) {
        if (const char* value = std::getenv(name.c_str()); value && *value) {
            impl_->api_key = value;
            break;
        }
    }
}

HttpChatClient::~HttpChatClient() = default;

const JudgeConfig& HttpChatClient::config() const { return impl_->config; }

ChatResult HttpChatClient::complete(const ChatRequest& request) {
    const JudgeConfig& cfg = impl_->config;

    ordered_json body;
    body["model"] = cfg.model_name;
    body["messages"] = ordered_json::array({ordered_json{{"role", "user"},
                                                         {"content", request.prompt}}});
    body["temperature"] = request.temperature.value_or(cfg.temperature);
    body["max_tokens"] = request.max_tokens.value_or(cfg.max_new_tokens);
    const std::string payload = body.dump();

    ChatResult result;
    result.request_id = impl_->make_request_id();
    auto started = std::chrono::steady_clock::now();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = cfg.backoff_initial * (1LL << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }

        httplib::Client client(impl_->origin);
        client.set_connection_timeout(cfg.timeout);
        client.set_read_timeout(cfg.timeout);
        client.set_write_timeout(cfg.timeout);
        httplib::Headers headers;
        if (!impl_->api_key.empty())
            headers.emplace("Authorization", "Bearer " + impl_->api_key);

        auto res = client.Post(impl_->path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            result.retries = attempt;
            continue;
        }
        if (res->status == 200) {
            result.text = extract_content(res->body);
            result.retries = attempt;
            result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - started)
                                    .count();
            return result;
        }
        if (res->status == 401 || res->status == 403)
            throw BackendError("auth failure (HTTP " + std::to_string(res->status) + ")");
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            result.retries = attempt;
            continue;
        }
        throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    throw BackendError("exhausted retries against " + cfg.endpoint_url + " (" + last_error + ")");
}

ChatResult complete(const std::string& prompt, const JudgeConfig& config) {
    HttpChatClient client(config);
    return client.complete(ChatRequest{prompt, std::nullopt, std::nullopt});
}

// ---------------------------------------------------------------------------
// Verdict parsing
// ---------------------------------------------------------------------------

ScalarVerdict parse_scalar(const std::string& raw, ScoreScale scale) {
    ScalarVerdict verdict;
    verdict.raw = raw;

    static const std::regex pattern(R"(score\s*:\s*(\d+))", std::regex::icase);
    auto begin = std::sregex_iterator(raw.begin(), raw.end(), pattern);
    auto end = std::sregex_iterator();
    std::smatch last;
    bool found = false;
    for (auto it = begin; it != end; ++it) {
        last = *it;
        found = true;
    }
    if (!found) return verdict;

    verdict.explanation = std::string(
        text::trim(std::string_view(raw).substr(0, static_cast<std::size_t>(last.position(0)))));
    try {
        verdict.score = std::stoi(last.str(1));
    } catch (const std::exception&) {
        return verdict;  // absurdly long digit run
    }
    verdict.parse_ok = scale.contains(verdict.score) && !verdict.explanation.empty();
    return verdict;
}

namespace {

enum class ParsedSide { a, b, both, neither, unknown };

ParsedSide classify_answer(std::string_view value) {
    std::vector<std::string> words = text::tokenize_words(value);
    if (words.empty()) return ParsedSide::unknown;
    std::string candidate = words[0];
    if (candidate == "plot" && words.size() > 1) candidate = words[1];
    if (candidate == "a") return ParsedSide::a;
    if (candidate == "b") return ParsedSide::b;
    if (candidate == "both") return ParsedSide::both;
    if (candidate == "neither") return ParsedSide::neither;
    return ParsedSide::unknown;
}

} // namespace

PairwiseVerdict parse_pairwise(const std::string& raw, const std::vector<Aspect>& aspects) {
    if (aspects.empty()) throw DataError("parse_pairwise: aspect list empty");
    PairwiseVerdict verdict;
    verdict.raw = raw;

    const std::string lowered = text::to_lower(raw);
    const auto lines = text::split_lines(lowered);

    for (Aspect aspect : aspects) {
        const std::string label = text::to_lower(aspect_name(aspect));
        ParsedSide state = ParsedSide::unknown;
        for (const std::string_view line : lines) {
            std::size_t pos = line.find(label);
            if (pos == std::string::npos) continue;
            std::size_t after = pos + label.size();
            while (after < line.size() &&
                   std::isspace(static_cast<unsigned char>(line[after]))) {
                ++after;
            }
            if (after >= line.size() || line[after] != ':') continue;
            ParsedSide parsed = classify_answer(line.substr(after + 1));
            if (parsed != ParsedSide::unknown) state = parsed;  // last labeled answer wins
        }
        if (state == ParsedSide::a) verdict.winners[aspect] = PlotSide::A;
        if (state == ParsedSide::b) verdict.winners[aspect] = PlotSide::B;
    }
    verdict.parse_ok = verdict.winners.size() == aspects.size();
    return verdict;
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

struct TranscriptWriter::Impl {
    std::ofstream out;
    std::mutex mutex;
};

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path)
    : impl_(std::make_unique<Impl>()) {
    impl_->out.open(path);
    if (!impl_->out) throw DataError("cannot open transcript log: " + path.string());
}

TranscriptWriter::~TranscriptWriter() = default;

void TranscriptWriter::record(const std::string& request_id, const std::string& example_id,
                              const std::string& prompt, const std::string& raw, long latency_ms,
                              int retries) {
    ordered_json record;
    record["request_id"] = request_id;
    record["example_id"] = example_id;
    record["prompt"] = prompt;
    record["raw"] = raw;
    record["latency_ms"] = latency_ms;
    record["retries"] = retries;
    std::lock_guard<std::mutex> lock(impl_->mutex);
    // Audit log: keep it durable request by request.
    impl_->out << record.dump() << '\n';
    impl_->out.flush();
}

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

namespace {

/// Runs `work(i)` over 0..n-1 with at most `parallelism` threads in flight.
void run_parallel(std::size_t n, int parallelism, const std::function<void(std::size_t)>& work) {
    if (n == 0) return;
    int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                work(i);
            }
        });
    }
    for (auto& t : threads) t.join();
}

template <typename Example>
std::vector<std::size_t> order_by_example_id(const std::vector<Example>& examples) {
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return examples[a].example_id < examples[b].example_id;
    });
    return order;
}

template <typename VerdictT, typename RenderFn, typename ParseFn>
BatchResult<VerdictT> run_batch_impl(std::size_t n,
                                     const std::function<const std::string&(std::size_t)>& id_of,
                                     RenderFn render, ParseFn parse, ChatBackend& backend,
                                     const BatchOptions& options, prompt::TaskKind task,
                                     ScoreScale scale) {
    BatchResult<VerdictT> result;
    result.entries.resize(n);

    run_parallel(n, options.parallelism, [&](std::size_t i) {
        BatchEntry<VerdictT>& entry = result.entries[i];
        entry.example_id = id_of(i);
        std::string prompt_text;
        try {
            prompt_text = render(i);
            ChatResult completion = backend.complete({prompt_text, std::nullopt, std::nullopt});
            if (options.transcript)
                options.transcript->record(completion.request_id, entry.example_id, prompt_text,
                                           completion.text, completion.latency_ms,
                                           completion.retries);
            entry.request_id = completion.request_id;
            entry.verdict = parse(i, completion.text);

            if (!entry.verdict.parse_ok && options.reprompt_on_parse_failure) {
                std::string reminder_prompt =
                    prompt_text + "\n\n" + prompt::format_reminder(task, scale);
                ChatResult second = backend.complete({reminder_prompt, std::nullopt, std::nullopt});
                if (options.transcript)
                    options.transcript->record(second.request_id, entry.example_id,
                                               reminder_prompt, second.text, second.latency_ms,
                                               second.retries);
                entry.request_id = second.request_id;
                entry.verdict = parse(i, second.text);
                entry.reprompt_count = 1;
            }
        } catch (const std::exception& e) {
            entry.failed = true;
            entry.error = e.what();
        }
    });

    for (const auto& entry : result.entries) {
        if (entry.failed || !entry.verdict.parse_ok) {
            ++result.failure_count;
            result.failed_ids.push_back(entry.example_id);
        }
    }
    return result;
}

std::vector<Aspect> gold_aspects(const PairwiseExample& example) {
    std::vector<Aspect> aspects;
    for (Aspect a : kAllAspects) {
        if (example.gold.count(a)) aspects.push_back(a);
    }
    if (aspects.empty()) aspects.assign(kAllAspects.begin(), kAllAspects.end());
    return aspects;
}

} // namespace

BatchResult<ScalarVerdict> evaluate_scalar_batch(const std::vector<ScalarExample>& examples,
                                                 ChatBackend& backend,
                                                 const prompt::TemplateSet& templates,
                                                 const BatchOptions& options, ScoreScale scale) {
    auto order = order_by_example_id(examples);
    return run_batch_impl<ScalarVerdict>(
        examples.size(),
        [&](std::size_t i) -> const std::string& { return examples[order[i]].example_id; },
        [&](std::size_t i) {
            const ScalarExample& ex = examples[order[i]];
            return prompt::render_scalar_prompt(ex.profile, ex.query, templates.scalar, scale);
        },
        [&](std::size_t, const std::string& raw) { return parse_scalar(raw, scale); }, backend,
        options, prompt::TaskKind::scalar, scale);
}

BatchResult<PairwiseVerdict> evaluate_pairwise_batch(const std::vector<PairwiseExample>& examples,
                                                     ChatBackend& backend,
                                                     const prompt::TemplateSet& templates,
                                                     const BatchOptions& options,
                                                     bool swap_plots) {
    auto order = order_by_example_id(examples);
    return run_batch_impl<PairwiseVerdict>(
        examples.size(),
        [&](std::size_t i) -> const std::string& { return examples[order[i]].example_id; },
        [&](std::size_t i) {
            const PairwiseExample& ex = examples[order[i]];
            const Item& first = swap_plots ? ex.plot_b : ex.plot_a;
            const Item& second = swap_plots ? ex.plot_a : ex.plot_b;
            return prompt::render_pairwise_prompt(ex.profile, ex.premise, first, second,
                                                  gold_aspects(ex), templates.pairwise);
        },
        [&](std::size_t i, const std::string& raw) {
            return parse_pairwise(raw, gold_aspects(examples[order[i]]));
        },
        backend, options, prompt::TaskKind::pairwise, ScoreScale{1, 10});
}

} // namespace prefeval::judge
