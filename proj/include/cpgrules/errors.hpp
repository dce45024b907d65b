#pragma once

#include <stdexcept>
#include <string>

namespace cpgrules {

// Base for all library errors. Catch this at CLI level; exit code policy
// lives in tools/, not here.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A file or config problem (bad path, unparseable config, invalid option).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input data (bad JSONL line, bad embedding row, bad lexicon row).
class DataError : public Error {
public:
    using Error::Error;
};

class MalformedHeader : public DataError {
public:
    using DataError::DataError;
};

class DimensionMismatch : public DataError {
public:
    DimensionMismatch(std::size_t line_no, std::size_t expected, std::size_t got)
        : DataError("embedding row at line " + std::to_string(line_no) + " has " +
                    std::to_string(got) + " values, expected " + std::to_string(expected)),
          line_no(line_no) {}
    std::size_t line_no;
};

class ZeroVector : public Error {
public:
    ZeroVector() : Error("cosine similarity undefined for a zero vector") {}
};

class TermNotFound : public Error {
public:
    explicit TermNotFound(const std::string& term) : Error("term not in embedding table: " + term) {}
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    explicit NonFiniteLoss(const std::string& diag) : Error("training diverged: " + diag) {}
};

class EmptySentence : public Error {
public:
    EmptySentence() : Error("cannot predict on a sentence with zero tokens") {}
};

class EmptyTestSet : public Error {
public:
    EmptyTestSet() : Error("evaluation requires a non-empty test set") {}
};

}  // namespace cpgrules
