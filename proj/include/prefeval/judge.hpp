#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "prefeval/types.hpp"

namespace prefeval::prompt {
struct TemplateSet;
}

namespace prefeval::judge {

struct JudgeConfig {
    std::string endpoint_url;
    std::string model_name;
    double temperature = 0.8;
    int max_new_tokens = 600;
    int max_retries = 3;
    int parallelism = 4;
    std::chrono::seconds timeout{60};
    // First of these env vars holding a value becomes the Bearer token.
    std::vector<std::string> api_key_env = {"PREFEVAL_API_KEY", "OPENAI_API_KEY"};
    // Initial backoff; doubles per retry. Tests shrink it.
    std::chrono::milliseconds backoff_initial{1000};
};

struct ChatRequest {
    std::string prompt;
    std::optional<double> temperature;   // overrides config when set
    std::optional<int> max_tokens;
};

struct ChatResult {
    std::string text;
    std::string request_id;
    int retries = 0;
    long latency_ms = 0;
};

/// Anything that can answer a prompt: the HTTP client in production, fakes in
/// tests. Implementations must be safe for concurrent complete() calls.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResult complete(const ChatRequest& request) = 0;
};

/// Chat-completion client speaking the common hosted-LLM wire protocol:
/// POST {model, messages, temperature, max_tokens}, Bearer token from the
/// environment. Retries transport errors, 429 and 5xx with exponential
/// backoff; 4xx auth errors fail immediately.
class HttpChatClient : public ChatBackend {
public:
    explicit HttpChatClient(JudgeConfig config);
    ~HttpChatClient() override;

    ChatResult complete(const ChatRequest& request) override;

    const JudgeConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around HttpChatClient.
ChatResult complete(const std::string& prompt, const JudgeConfig& config);

struct ScalarVerdict {
    std::string explanation;
    int score = 0;
    std::string raw;
    bool parse_ok = false;
};

struct PairwiseVerdict {
    std::map<Aspect, PlotSide> winners;
    std::string raw;
    bool parse_ok = false;
};

/// Extracts the last "Score: <n>" line (case-insensitive); everything before
/// the match becomes the explanation. Missing or out-of-range scores and empty
/// explanations yield parse_ok = false, never an exception.
ScalarVerdict parse_scalar(const std::string& raw, ScoreScale scale = {1, 10});

/// Extracts "<Aspect>: A|B" lines by label, order-independent. Both/Neither or
/// missing answers leave the aspect out and clear parse_ok.
PairwiseVerdict parse_pairwise(const std::string& raw, const std::vector<Aspect>& aspects);

/// Thread-safe JSONL sink for request/response transcripts.
class TranscriptWriter {
public:
    explicit TranscriptWriter(const std::filesystem::path& path);
    ~TranscriptWriter();

    void record(const std::string& request_id, const std::string& example_id,
                const std::string& prompt, const std::string& raw, long latency_ms, int retries);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

template <typename VerdictT>
struct BatchEntry {
    std::string example_id;
    VerdictT verdict;
    std::string request_id;
    int reprompt_count = 0;
    bool failed = false;       // transport permanently failed
    std::string error;
};

template <typename VerdictT>
struct BatchResult {
    std::vector<BatchEntry<VerdictT>> entries;  // example_id order
    std::size_t failure_count = 0;              // transport failures + bad parses
    std::vector<std::string> failed_ids;
};

struct BatchOptions {
    int parallelism = 4;
    bool reprompt_on_parse_failure = true;
    TranscriptWriter* transcript = nullptr;
};

/// Runs every example through the backend with at most `parallelism` in-flight
/// requests; results come back in example_id order no matter the completion
/// order. A failed parse is re-prompted once with a format reminder. Transport
/// failures mark the entry failed; the batch itself never aborts.
BatchResult<ScalarVerdict> evaluate_scalar_batch(const std::vector<ScalarExample>& examples,
                                                 ChatBackend& backend,
                                                 const prompt::TemplateSet& templates,
                                                 const BatchOptions& options,
                                                 ScoreScale scale = {1, 10});

BatchResult<PairwiseVerdict> evaluate_pairwise_batch(const std::vector<PairwiseExample>& examples,
                                                     ChatBackend& backend,
                                                     const prompt::TemplateSet& templates,
                                                     const BatchOptions& options,
                                                     bool swap_plots = false);

} // namespace prefeval::judge
