#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace perflens {

/// Base of every error the engine throws. `kind()` is a stable short tag used
/// by the CLI and the JSON-RPC layer to pick exit and error codes.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("IoError", message) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("FormatError", message) {}
};

/// Malformed text. `line`/`column` are 1-based; for single-line inputs such as
/// cost polynomials `line` is 1 and `column` is the byte offset plus one.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("ParseError", message + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line_(line),
          column_(column) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

enum class DiagnosticLevel { Info, Warning, Error };

struct Diagnostic {
    DiagnosticLevel level = DiagnosticLevel::Warning;
    std::string message;
};

/// Collects non-fatal findings (bad cost strings, scan failures, ...) so they
/// stay out of the data returned to callers.
class Diagnostics {
public:
    void warn(std::string message) { items_.push_back({DiagnosticLevel::Warning, std::move(message)}); }
    void info(std::string message) { items_.push_back({DiagnosticLevel::Info, std::move(message)}); }
    void error(std::string message) { items_.push_back({DiagnosticLevel::Error, std::move(message)}); }

    void append(const Diagnostics& other) {
        items_.insert(items_.end(), other.items_.begin(), other.items_.end());
    }

    [[nodiscard]] const std::vector<Diagnostic>& items() const noexcept { return items_; }
    [[nodiscard]] std::size_t warning_count() const noexcept {
        std::size_t n = 0;
        for (const auto& d : items_) {
            if (d.level == DiagnosticLevel::Warning) ++n;
        }
        return n;
    }
    [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
    void clear() noexcept { items_.clear(); }

private:
    std::vector<Diagnostic> items_;
};

}  // namespace perflens
