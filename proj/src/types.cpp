#include "prefeval/types.hpp"

#include "prefeval/text.hpp"

namespace prefeval {

std::string_view provenance_name(Provenance p) {
    switch (p) {
    case Provenance::raw: return "raw";
    case Provenance::anonymized: return "anonymized";
    case Provenance::summarized: return "summarized";
    }
    return "raw";
}

std::optional<Provenance> provenance_from_name(std::string_view name) {
    if (name == "raw") return Provenance::raw;
    if (name == "anonymized") return Provenance::anonymized;
    if (name == "summarized") return Provenance::summarized;
    return std::nullopt;
}

std::string_view aspect_name(Aspect a) {
    switch (a) {
    case Aspect::Interestingness: return "Interestingness";
    case Aspect::Adaptability: return "Adaptability";
    case Aspect::Surprise: return "Surprise";
    case Aspect::CharacterDevelopment: return "Character Development";
    case Aspect::Ending: return "Ending";
    }
    return "Interestingness";
}

std::optional<Aspect> aspect_from_name(std::string_view name) {
    std::string lowered = text::to_lower(text::trim(name));
    for (Aspect a : kAllAspects) {
        if (lowered == text::to_lower(aspect_name(a))) return a;
    }
    // Common compact spellings.
    if (lowered == "character" || lowered == "characterdevelopment" ||
        lowered == "character_development") {
        return Aspect::CharacterDevelopment;
    }
    return std::nullopt;
}

std::optional<PlotSide> side_from_text(std::string_view raw) {
    std::string t = text::to_lower(text::trim(raw));
    if (t == "a" || t == "plot a") return PlotSide::A;
    if (t == "b" || t == "plot b") return PlotSide::B;
    return std::nullopt;
}

} // namespace prefeval
