#pragma once

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpgrules/errors.hpp"
#include "cpgrules/strings.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

// Lexicon-based tagger over the fixed 12-tag set. Lookup order:
// punctuation/symbol tokens, digit-only rule, lexicon, suffix heuristics,
// NOUN fallback. Deterministic for a fixed lexicon.
class PosTagger {
public:
    PosTagger() = default;

    explicit PosTagger(std::unordered_map<std::string, PosTag> lexicon)
        : lexicon_(std::move(lexicon)) {}

    // Lexicon file format: one entry per line, `word<TAB>TAG`. Blank lines
    // and lines starting with '#' are skipped.
    static PosTagger from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open tag lexicon: " + path);
        std::unordered_map<std::string, PosTag> lex;
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError("tag lexicon line " + std::to_string(line_no) +
                                ": expected word<TAB>TAG");
            lex[str::lower(line.substr(0, tab))] = tag_from_name(str::trim(line.substr(tab + 1)));
        }
        return PosTagger(std::move(lex));
    }

    PosTag tag(const Token& token) const {
        const std::string& w = token.normalized;
        if (w.empty()) return PosTag::X;
        if (is_punct(w)) return PosTag::Punct;
        if (is_numeric(w)) return PosTag::Num;
        if (auto it = lexicon_.find(w); it != lexicon_.end()) return it->second;
        if (str::ends_with(w, "ed") || str::ends_with(w, "ing")) return PosTag::Verb;
        if (str::ends_with(w, "ly")) return PosTag::Adv;
        return PosTag::Noun;
    }

    void tag_sentence(SentenceRecord& sentence) const {
        for (auto& t : sentence.tokens) t.pos = tag(t);
    }

    size_t size() const { return lexicon_.size(); }

private:
    static bool is_numeric(const std::string& w) {
        bool digit_seen = false;
        for (char c : w) {
            if (str::is_ascii_digit(c)) {
                digit_seen = true;
            } else if (c != '.' && c != '/') {
                return false;
            }
        }
        return digit_seen;
    }

    static bool is_punct(const std::string& w) {
        for (char c : w)
            if (str::is_ascii_alpha(c) || str::is_ascii_digit(c)) return false;
        return true;
    }

    std::unordered_map<std::string, PosTag> lexicon_;
};

}  // namespace cpgrules
