#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "co2/diag.hpp"

namespace co2::syntax {

enum class Tok {
    Ident,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Dot,
    Plus,
    Pipe,
    Eq,
    Comma,
    Quest,
    Bang,
    Caret,
    Arrow,    // ->
    CArrow,   // -->>
    AndOp,    // /\ .
    OrOp,     // \/
    Diamond,  // <>
    Box,      // []
    End,
};

inline std::string describe(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrack: return "'['";
        case Tok::RBrack: return "']'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Dot: return "'.'";
        case Tok::Plus: return "'+'";
        case Tok::Pipe: return "'|'";
        case Tok::Eq: return "'='";
        case Tok::Comma: return "','";
        case Tok::Quest: return "'?'";
        case Tok::Bang: return "'!'";
        case Tok::Caret: return "'^'";
        case Tok::Arrow: return "'->'";
        case Tok::CArrow: return "'-->>'";
        case Tok::AndOp: return "'/\\'";
        case Tok::OrOp: return "'\\/'";
        case Tok::Diamond: return "'<>'";
        case Tok::Box: return "'[]'";
        case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Span span;
};

/*
  Identifiers are [A-Za-z_][A-Za-z0-9_]* and may contain single '/'
  separators between such runs (action names tagged with a principal,
  as produced by the contract encoding).  '//' always starts a line
  comment.
*/
inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    Pos pos;
    std::size_t i = 0;

    auto error = [&](const std::string& msg) {
        throw ParseError({Diagnostic{Severity::Error, Span{pos, pos}, msg, ""}});
    };
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++pos.line;
                pos.col = 1;
            } else {
                ++pos.col;
            }
        }
    };
    auto is_head = [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    };
    auto is_body = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    auto push = [&](Tok kind, std::size_t len) {
        Token t;
        t.kind = kind;
        t.text = src.substr(i, len);
        t.span.begin = pos;
        advance(len);
        t.span.end = pos;
        out.push_back(std::move(t));
    };

    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() &&
                   std::isdigit(static_cast<unsigned char>(src[j])))
                ++j;
            push(Tok::Ident, j - i);
            continue;
        }
        if (is_head(c)) {
            std::size_t j = i;
            while (j < src.size()) {
                if (is_body(src[j])) {
                    ++j;
                } else if (src[j] == '/' && j + 1 < src.size() &&
                           is_body(src[j + 1]) && src[j + 1] != '/') {
                    j += 2;
                } else {
                    break;
                }
            }
            push(Tok::Ident, j - i);
            continue;
        }
        switch (c) {
            case '(': push(Tok::LParen, 1); continue;
            case ')': push(Tok::RParen, 1); continue;
            case '[':
                if (i + 1 < src.size() && src[i + 1] == ']') {
                    push(Tok::Box, 2);
                } else {
                    push(Tok::LBrack, 1);
                }
                continue;
            case ']': push(Tok::RBrack, 1); continue;
            case '{': push(Tok::LBrace, 1); continue;
            case '}': push(Tok::RBrace, 1); continue;
            case '.': push(Tok::Dot, 1); continue;
            case '+': push(Tok::Plus, 1); continue;
            case '|': push(Tok::Pipe, 1); continue;
            case '=': push(Tok::Eq, 1); continue;
            case ',': push(Tok::Comma, 1); continue;
            case '?': push(Tok::Quest, 1); continue;
            case '!': push(Tok::Bang, 1); continue;
            case '^': push(Tok::Caret, 1); continue;
            case '<':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    push(Tok::Diamond, 2);
                    continue;
                }
                error("expected '<>'");
                break;
            case '-':
                if (src.compare(i, 4, "-->>") == 0) {
                    push(Tok::CArrow, 4);
                    continue;
                }
                if (src.compare(i, 2, "->") == 0) {
                    push(Tok::Arrow, 2);
                    continue;
                }
                error("expected '->' or '-->>'");
                break;
            case '/':
                if (i + 1 < src.size() && src[i + 1] == '\\') {
                    push(Tok::AndOp, 2);
                    continue;
                }
                error("expected '/\\'");
                break;
            case '\\':
                if (i + 1 < src.size() && src[i + 1] == '/') {
                    push(Tok::OrOp, 2);
                    continue;
                }
                error("expected '\\/'");
                break;
            default:
                error(std::string("unexpected character '") + c + "'");
        }
    }
    Token end;
    end.kind = Tok::End;
    end.span = Span{pos, pos};
    out.push_back(std::move(end));
    return out;
}

}  // namespace co2::syntax
