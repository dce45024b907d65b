#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpgrules/errors.hpp"
#include "cpgrules/strings.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

// Documents come either as plain UTF-8 text (one document per file, id =
// file stem) or as JSONL with one {"id", "text"} object per line.
inline std::vector<Document> load_documents(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open document file: " + path);
    std::vector<Document> docs;
    if (str::ends_with(path, ".jsonl")) {
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (str::trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("text"))
                throw DataError("bad document JSONL at " + path + ":" + std::to_string(line_no));
            docs.push_back({j["id"].get<std::string>(), j["text"].get<std::string>()});
        }
    } else {
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        docs.push_back({std::filesystem::path(path).stem().string(), std::move(text)});
    }
    return docs;
}

// Annotated corpus: JSONL of {"id", "sent_index", "text", "label"} with
// label in {C-A, C-C, A, NA}. Tokens are not filled here.
inline std::vector<SentenceRecord> load_annotated_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open corpus: " + path);
    std::vector<SentenceRecord> corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (str::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("text"))
            throw DataError("bad corpus JSONL at " + path + ":" + std::to_string(line_no));
        SentenceRecord rec;
        rec.doc_id = j.value("id", std::string("doc"));
        rec.sent_index = j.value("sent_index", static_cast<int>(corpus.size()));
        rec.raw = j["text"].get<std::string>();
        if (j.contains("label") && !j["label"].is_null())
            rec.label = class_from_name(j["label"].get<std::string>());
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

inline void save_annotated_corpus(const std::vector<SentenceRecord>& corpus,
                                  std::ostream& out) {
    for (const auto& rec : corpus) {
        nlohmann::json j;
        j["id"] = rec.doc_id;
        j["sent_index"] = rec.sent_index;
        j["text"] = rec.raw;
        if (rec.label)
            j["label"] = class_name(*rec.label);
        else
            j["label"] = nullptr;
        out << j.dump() << "\n";
    }
}

}  // namespace cpgrules
