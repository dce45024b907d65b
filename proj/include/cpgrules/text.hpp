#pragma once

#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "cpgrules/errors.hpp"
#include "cpgrules/porter.hpp"
#include "cpgrules/strings.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

class StopwordList {
public:
    StopwordList() = default;

    explicit StopwordList(std::initializer_list<std::string> words) {
        for (auto& w : words) words_.insert(str::lower(w));
    }

    // One word per line; '#' comments and blank lines skipped.
    static StopwordList from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open stop-word list: " + path);
        StopwordList list;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto w = str::trim(line);
            if (w.empty() || w[0] == '#') continue;
            list.words_.insert(str::lower(w));
        }
        return list;
    }

    bool contains(const std::string& normalized) const { return words_.count(normalized) > 0; }
    size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

namespace detail {

// Abbreviations whose trailing period does not end a sentence. Matched
// case-insensitively against the one or two words before the period.
inline const std::set<std::string>& sentence_abbreviations() {
    static const std::set<std::string> abbrevs = {
        "e.g", "i.e", "etc", "vs", "cf", "ca", "fig", "figs", "eq", "dr",
        "mr", "mrs", "ms", "st", "no", "al", "mm hg", "approx",
    };
    return abbrevs;
}

inline bool is_sentence_terminal(char c) { return c == '.' || c == '?' || c == '!'; }

inline bool is_closing(char c) { return c == ')' || c == ']' || c == '"' || c == '\''; }

// Word (letters plus internal periods, to catch "e.g") ending at text[pos-1].
inline std::string word_before(const std::string& text, size_t pos) {
    size_t end = pos;
    size_t begin = end;
    while (begin > 0) {
        char c = text[begin - 1];
        if (str::is_ascii_alpha(c) || c == '.')
            --begin;
        else
            break;
    }
    return str::lower(text.substr(begin, end - begin));
}

inline bool abbreviation_before(const std::string& text, size_t dot) {
    std::string w = word_before(text, dot);
    if (w.empty()) return false;
    const auto& abbrevs = sentence_abbreviations();
    if (abbrevs.count(w)) return true;
    // Two-word abbreviations such as "mm hg".
    size_t wstart = dot - w.size();
    size_t p = wstart;
    while (p > 0 && text[p - 1] == ' ') --p;
    std::string prev = word_before(text, p);
    return !prev.empty() && abbrevs.count(prev + " " + w) > 0;
}

}  // namespace detail

// Rule-based splitter: a sentence ends at `.?!` (plus trailing closers)
// followed by whitespace and an uppercase letter or digit. Decimal points
// never match (no whitespace follows) and known abbreviations are skipped.
inline std::vector<SentenceRecord> split_sentences(const Document& doc) {
    std::vector<SentenceRecord> out;
    const std::string& text = doc.text;
    const size_t n = text.size();

    auto emit = [&](size_t begin, size_t end) {
        if (begin >= end) return;
        SentenceRecord rec;
        rec.doc_id = doc.id;
        rec.sent_index = static_cast<int>(out.size());
        rec.raw = text.substr(begin, end - begin);
        rec.begin = begin;
        rec.end = end;
        out.push_back(std::move(rec));
    };

    size_t start = 0;
    while (start < n && std::isspace(static_cast<unsigned char>(text[start]))) ++start;

    size_t i = start;
    while (i < n) {
        char c = text[i];
        if (!detail::is_sentence_terminal(c)) {
            ++i;
            continue;
        }
        if (c == '.' && detail::abbreviation_before(text, i)) {
            ++i;
            continue;
        }
        size_t end = i + 1;
        while (end < n && detail::is_closing(text[end])) ++end;
        size_t ws = end;
        while (ws < n && std::isspace(static_cast<unsigned char>(text[ws]))) ++ws;
        bool at_eof = ws >= n;
        bool next_starts_sentence =
            !at_eof && ws > end &&
            (std::isupper(static_cast<unsigned char>(text[ws])) ||
             str::is_ascii_digit(text[ws]));
        if (at_eof || next_starts_sentence) {
            emit(start, end);
            start = ws;
            i = ws;
        } else {
            i = end;
        }
    }
    if (start < n) {
        size_t end = n;
        while (end > start && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
        emit(start, end);
    }
    return out;
}

struct TokenizeOptions {
    bool remove_stop_words = false;
    bool stemming = false;
};

namespace detail {

inline bool word_continues(const std::string& s, size_t i) {
    char c = s[i];
    if (str::is_ascii_alpha(c) || str::is_ascii_digit(c)) return true;
    if ((c == '-' || c == '\'') && i + 1 < s.size() &&
        (str::is_ascii_alpha(s[i + 1]) || str::is_ascii_digit(s[i + 1])))
        return true;
    return false;
}

inline size_t utf8_len(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;
}

}  // namespace detail

// Raw scan of a sentence into surface tokens: words (letters with internal
// hyphen/apostrophe), numbers (digits with internal . or /, so "140.5" and
// "150/90" stay whole), and single punctuation/symbol tokens. Non-ASCII
// code points become one token each.
inline std::vector<Token> scan_tokens(const std::string& raw) {
    std::vector<Token> tokens;
    size_t i = 0;
    const size_t n = raw.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        size_t begin = i;
        if (str::is_ascii_alpha(static_cast<char>(c))) {
            ++i;
            while (i < n && detail::word_continues(raw, i)) ++i;
        } else if (str::is_ascii_digit(static_cast<char>(c))) {
            ++i;
            while (i < n) {
                char d = raw[i];
                if (str::is_ascii_digit(d)) {
                    ++i;
                } else if ((d == '.' || d == '/') && i + 1 < n && str::is_ascii_digit(raw[i + 1])) {
                    i += 2;
                } else {
                    break;
                }
            }
        } else {
            i += detail::utf8_len(c);
        }
        Token t;
        t.surface = raw.substr(begin, i - begin);
        t.normalized = str::lower(t.surface);
        t.stem = t.normalized;
        t.offset = begin;
        t.index = static_cast<int>(tokens.size());
        tokens.push_back(std::move(t));
    }
    return tokens;
}

// Fills sentence.tokens. With stop-word removal the surviving tokens are
// re-indexed contiguously; stemming applies the Porter stemmer to the
// normalized form.
inline void tokenize(SentenceRecord& sentence, const TokenizeOptions& opts = {},
                     const StopwordList& stop_words = {}) {
    auto tokens = scan_tokens(sentence.raw);
    if (opts.remove_stop_words) {
        std::vector<Token> kept;
        kept.reserve(tokens.size());
        for (auto& t : tokens) {
            if (stop_words.contains(t.normalized)) continue;
            t.index = static_cast<int>(kept.size());
            kept.push_back(std::move(t));
        }
        tokens = std::move(kept);
    }
    if (opts.stemming) {
        static const PorterStemmer stemmer;
        for (auto& t : tokens) t.stem = stemmer.stem(t.normalized);
    }
    sentence.tokens = std::move(tokens);
}

// Adjacent normalized-token pairs; requires tokens filled. Qualifier mining
// calls this with stop words retained.
inline std::vector<std::string> bigrams(const SentenceRecord& sentence) {
    std::vector<std::string> out;
    const auto& toks = sentence.tokens;
    if (toks.size() < 2) return out;
    out.reserve(toks.size() - 1);
    for (size_t i = 0; i + 1 < toks.size(); ++i)
        out.push_back(toks[i].normalized + " " + toks[i + 1].normalized);
    return out;
}

}  // namespace cpgrules
