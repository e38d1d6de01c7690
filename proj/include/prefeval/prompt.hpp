#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prefeval/types.hpp"

namespace prefeval::prompt {

enum class TaskKind { scalar, pairwise };

/// A prompt template is plain text with {{...}} placeholders. Scalar templates
/// carry {{profile}} and {{query}}; pairwise templates carry {{profile}},
/// {{premise}}, {{plot_a}}, {{plot_b}} and {{questions}}. Each slot must
/// appear exactly once.
struct PromptTemplate {
    TaskKind task = TaskKind::scalar;
    std::string text;
};

struct TemplateSet {
    int version = 1;
    PromptTemplate scalar;
    PromptTemplate pairwise;
};

/// Built-in templates: profile block, then the query, then the answer-format
/// instructions.
const TemplateSet& default_templates();

/// Throws DataError when a required slot is missing or duplicated.
void validate_template(const PromptTemplate& tpl);

PromptTemplate load_template(const std::filesystem::path& path, TaskKind task);

/// Renders profile entries in the given order, one numbered block per entry
/// (plot excerpt, review text, score). An empty profile renders as "".
/// Throws DataError when `order` is not a permutation of 0..K-1.
std::string serialize_profile(const ReviewerProfile& profile, std::span<const std::size_t> order);

/// serialize_profile with the identity order.
std::string serialize_profile(const ReviewerProfile& profile);

std::string render_scalar_prompt(const ReviewerProfile& profile, const Item& query,
                                 const PromptTemplate& tpl, ScoreScale scale = {1, 10});

std::string render_pairwise_prompt(const ReviewerProfile& profile, const std::string& premise,
                                   const Item& plot_a, const Item& plot_b,
                                   const std::vector<Aspect>& aspects, const PromptTemplate& tpl);

/// Canonical wording of each aspect's comparison question.
std::string_view aspect_question(Aspect a);

/// Reminder appended when a completion fails to parse.
std::string format_reminder(TaskKind task, ScoreScale scale = {1, 10});

} // namespace prefeval::prompt
