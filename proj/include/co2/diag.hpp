#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "co2/ident.hpp"

namespace co2 {

struct Pos {
    int line = 1;
    int col = 1;
};

struct Span {
    Pos begin;
    Pos end;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
    Severity severity = Severity::Error;
    Span span;
    std::string message;
    std::string suggestion;  // empty when there is nothing to suggest

    std::string render() const {
        std::ostringstream out;
        switch (severity) {
            case Severity::Error: out << "error"; break;
            case Severity::Warning: out << "warning"; break;
            case Severity::Note: out << "note"; break;
        }
        out << " at " << span.begin.line << ":" << span.begin.col << ": " << message;
        if (!suggestion.empty()) out << " (" << suggestion << ")";
        return out.str();
    }
};

struct ParseError : Error {
    explicit ParseError(std::vector<Diagnostic> diags)
        : Error(render_all(diags)), diagnostics(std::move(diags)) {}

    std::vector<Diagnostic> diagnostics;

  private:
    static std::string render_all(const std::vector<Diagnostic>& diags) {
        std::ostringstream out;
        for (std::size_t i = 0; i < diags.size(); ++i) {
            if (i) out << "\n";
            out << diags[i].render();
        }
        return out.str();
    }
};

}  // namespace co2
