#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cpgrules/errors.hpp"

namespace cpgrules {

struct Document {
    std::string id;
    std::string text;
};

// 12-tag universal-style tagset. Order is fixed: the POS one-hot segment of
// an IWV vector indexes into this array.
enum class PosTag : int {
    Noun = 0,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    Punct,
    X,
};

inline constexpr int kTagsetSize = 12;

inline constexpr std::array<const char*, kTagsetSize> kTagNames = {
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X",
};

inline const char* tag_name(PosTag t) { return kTagNames[static_cast<size_t>(t)]; }

inline PosTag tag_from_name(const std::string& name) {
    for (int i = 0; i < kTagsetSize; ++i)
        if (name == kTagNames[static_cast<size_t>(i)]) return static_cast<PosTag>(i);
    throw DataError("unknown POS tag: " + name);
}

struct Token {
    std::string surface;
    std::string normalized;  // lowercase(surface)
    std::string stem;        // Porter stem of normalized, or normalized when stemming is off
    PosTag pos = PosTag::X;
    int index = 0;           // 0-based position in the (possibly filtered) sentence
    size_t offset = 0;       // byte offset of surface within the sentence raw text
};

enum class SentenceClass : int {
    ConditionAction = 0,  // C-A
    ConditionConsequence, // C-C
    Action,               // A
    NotApplicable,        // NA
};

inline constexpr int kClassCount = 4;

inline constexpr std::array<const char*, kClassCount> kClassNames = {"C-A", "C-C", "A", "NA"};

inline const char* class_name(SentenceClass c) { return kClassNames[static_cast<size_t>(c)]; }

inline SentenceClass class_from_name(const std::string& name) {
    for (int i = 0; i < kClassCount; ++i)
        if (name == kClassNames[static_cast<size_t>(i)]) return static_cast<SentenceClass>(i);
    throw DataError("unknown sentence class: " + name + " (expected C-A, C-C, A or NA)");
}

struct SentenceRecord {
    std::string doc_id;
    int sent_index = 0;
    std::string raw;
    std::vector<Token> tokens;
    std::optional<SentenceClass> label;
    // Byte span of raw within the source document; lets callers reassemble
    // the document from its sentences.
    size_t begin = 0;
    size_t end = 0;
};

}  // namespace cpgrules
