#include "prefeval/prompt.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "prefeval/errors.hpp"
#include "prefeval/jsonl.hpp"

namespace prefeval::prompt {

namespace {

constexpr std::string_view kScalarTemplate =
    "You are a reviewer with strong personal tastes. Your past reviews are "
    "listed below. Infer your preferences from them and judge the new plot "
    "from the same perspective.\n"
    "\n"
    "{{profile}}"
    "New plot:\n"
    "{{query}}\n"
    "\n"
    "Write the review this reviewer would write for the new plot, then give "
    "the score they would give. Finish with a single line formatted exactly "
    "as \"Score: <n>\", where <n> is an integer from {{score_min}} to "
    "{{score_max}}.\n";

constexpr std::string_view kPairwiseTemplate =
    "You are a reviewer with strong personal tastes. Your previous judgment "
    "is listed below. Infer your preferences from it and compare the two new "
    "plots from the same perspective.\n"
    "\n"
    "{{profile}}"
    "Premise:\n"
    "{{premise}}\n"
    "\n"
    "Plot A:\n"
    "{{plot_a}}\n"
    "\n"
    "Plot B:\n"
    "{{plot_b}}\n"
    "\n"
    "Answer the following questions:\n"
    "{{questions}}"
    "\n"
    "Answer every question on its own line, formatted exactly as "
    "\"<Aspect>: A\" or \"<Aspect>: B\", using the aspect name printed before "
    "each question.\n";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t count = 0;
    std::size_t pos = text.find(needle);
    while (pos != std::string_view::npos) {
        ++count;
        pos = text.find(needle, pos + needle.size());
    }
    return count;
}

std::string replace_once(std::string text, std::string_view slot, std::string_view value) {
    std::size_t pos = text.find(slot);
    if (pos == std::string::npos)
        throw DataError("template slot missing: " + std::string(slot));
    text.replace(pos, slot.size(), value);
    return text;
}

std::vector<std::string_view> required_slots(TaskKind task) {
    if (task == TaskKind::scalar) return {"{{profile}}", "{{query}}"};
    return {"{{profile}}", "{{premise}}", "{{plot_a}}", "{{plot_b}}", "{{questions}}"};
}

} // namespace

const TemplateSet& default_templates() {
    static const TemplateSet set = [] {
        TemplateSet s;
        s.version = 1;
        s.scalar = {TaskKind::scalar, std::string(kScalarTemplate)};
        s.pairwise = {TaskKind::pairwise, std::string(kPairwiseTemplate)};
        validate_template(s.scalar);
        validate_template(s.pairwise);
        return s;
    }();
    return set;
}

void validate_template(const PromptTemplate& tpl) {
    for (std::string_view slot : required_slots(tpl.task)) {
        std::size_t n = count_occurrences(tpl.text, slot);
        if (n == 0) throw DataError("template slot missing: " + std::string(slot));
        if (n > 1) throw DataError("template slot duplicated: " + std::string(slot));
    }
}

PromptTemplate load_template(const std::filesystem::path& path, TaskKind task) {
    PromptTemplate tpl{task, jsonl::read_file(path)};
    validate_template(tpl);
    return tpl;
}

std::string serialize_profile(const ReviewerProfile& profile,
                              std::span<const std::size_t> order) {
    const std::size_t k = profile.entries.size();
    if (order.size() != k) throw DataError("profile order has wrong length");
    std::vector<bool> seen(k, false);
    for (std::size_t idx : order) {
        if (idx >= k || seen[idx]) throw DataError("profile order is not a permutation");
        seen[idx] = true;
    }
    if (k == 0) return "";

    std::ostringstream out;
    for (std::size_t i = 0; i < k; ++i) {
        const ProfileEntry& entry = profile.entries[order[i]];
        out << "Review " << (i + 1) << ":\n";
        if (!entry.body.empty()) out << "Plot: " << entry.body << "\n";
        out << "Review: " << entry.explanation << "\n";
        if (entry.score) out << "Score: " << *entry.score << "\n";
        out << "\n";
    }
    return out.str();
}

std::string serialize_profile(const ReviewerProfile& profile) {
    std::vector<std::size_t> order(profile.entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return serialize_profile(profile, order);
}

std::string render_scalar_prompt(const ReviewerProfile& profile, const Item& query,
                                 const PromptTemplate& tpl, ScoreScale scale) {
    if (tpl.task != TaskKind::scalar) throw DataError("template task is not scalar");
    if (query.body.empty()) throw DataError("query body empty: " + query.item_id);
    validate_template(tpl);
    std::string out = replace_once(tpl.text, "{{profile}}", serialize_profile(profile));
    out = replace_once(std::move(out), "{{query}}", query.body);
    // Optional scale placeholders; templates may hard-code the range instead.
    while (out.find("{{score_min}}") != std::string::npos)
        out = replace_once(std::move(out), "{{score_min}}", std::to_string(scale.min));
    while (out.find("{{score_max}}") != std::string::npos)
        out = replace_once(std::move(out), "{{score_max}}", std::to_string(scale.max));
    return out;
}

std::string render_pairwise_prompt(const ReviewerProfile& profile, const std::string& premise,
                                   const Item& plot_a, const Item& plot_b,
                                   const std::vector<Aspect>& aspects,
                                   const PromptTemplate& tpl) {
    if (tpl.task != TaskKind::pairwise) throw DataError("template task is not pairwise");
    if (aspects.empty()) throw DataError("aspect list empty");
    validate_template(tpl);

    std::ostringstream questions;
    for (std::size_t i = 0; i < aspects.size(); ++i) {
        questions << (i + 1) << ". " << aspect_name(aspects[i]) << ": "
                  << aspect_question(aspects[i]) << "\n";
    }

    std::string out = replace_once(tpl.text, "{{profile}}", serialize_profile(profile));
    out = replace_once(std::move(out), "{{premise}}", premise);
    out = replace_once(std::move(out), "{{plot_a}}", plot_a.body);
    out = replace_once(std::move(out), "{{plot_b}}", plot_b.body);
    out = replace_once(std::move(out), "{{questions}}", questions.str());
    return out;
}

std::string_view aspect_question(Aspect a) {
    switch (a) {
    case Aspect::Interestingness:
        return "Which story plot is more interesting to you?";
    case Aspect::Adaptability:
        return "In your opinion, which one of the plots above could generate a more "
               "interesting book or movie (when a full story is written based on it)?";
    case Aspect::Surprise:
        return "Which story plot created more suspense and surprise?";
    case Aspect::CharacterDevelopment:
        return "Which story's characters or events do you identify with or care for more?";
    case Aspect::Ending:
        return "Which story has a better ending?";
    }
    return "";
}

std::string format_reminder(TaskKind task, ScoreScale scale) {
    if (task == TaskKind::scalar) {
        return "Reminder: finish your answer with a single line formatted exactly as "
               "\"Score: <n>\", where <n> is an integer from " +
               std::to_string(scale.min) + " to " + std::to_string(scale.max) + ".";
    }
    return "Reminder: answer every question on its own line, formatted exactly as "
           "\"<Aspect>: A\" or \"<Aspect>: B\".";
}

} // namespace prefeval::prompt
