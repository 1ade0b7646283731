// Built-in prompt templates and the placeholder substitution they use.
// Files under prompts/ ship the same text for editing without a rebuild.
#pragma once

#include <initializer_list>
#include <string>
#include <utility>

namespace hyperrag {

inline const char* default_extract_template() {
    return R"(You extract a knowledge hypergraph from text.
Return strict JSON only, shaped exactly like this example:
{"entities": [{"name": "Zyn", "kind_hint": "brand", "description": "nicotine pouch brand"}], "relations": [{"members": ["Zyn", "Cool Mint"], "relation_text": "Zyn sells the Cool Mint flavor", "weight": 1.0}]}
Rules: every relation member must appear under "entities"; weights lie in [0,1]; do not wrap the JSON in prose or code fences.

TEXT:
{chunk})";
}

inline const char* default_generate_template() {
    return R"(Answer the question using only the provided context blocks.
Answer concisely in plain text.

QUESTION: {question})";
}

inline const char* default_judge_template() {
    return R"(You judge a predicted answer against a gold reference answer.
Score three aspects from 0 to 1: comprehensiveness, correctness, relevance.
Return strict JSON only: {"comprehensiveness": 0.0, "correctness": 0.0, "relevance": 0.0}

QUESTION: {question}
PREDICTION: {prediction}
GOLD: {gold})";
}

inline std::string render_template(
    std::string tpl,
    std::initializer_list<std::pair<std::string, std::string>> vars) {
    for (const auto& [key, value] : vars) {
        const std::string placeholder = "{" + key + "}";
        size_t pos = 0;
        while ((pos = tpl.find(placeholder, pos)) != std::string::npos) {
            tpl.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return tpl;
}

}  // namespace hyperrag
