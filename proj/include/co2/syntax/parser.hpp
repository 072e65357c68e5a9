#pragma once

/*
  Surface syntax shared by both contract models.

  file      := 'model' ('ccs' | 'pcl') decl*
  decl      := ('def' | 'rec') NAME '=' ccs-term        (ccs only)
             | 'let' NAME '=' contract
             | 'proc' NAME ['(' params ')'] '=' process
             | 'system' '{' [sys ('|' sys)*] '}'
  sys       := '0' | NAME '[' process ']' | sN '[' contract ']'
             | '(' u ')' '(' sys ('|' sys)* ')'
  process   := par of sums; '.' binds tighter than '+', '+' tighter
               than '|'
  prefix    := 'tau' | 'do' u action | 'tell' t '[' x ']' '(' contract ')'
             | 'ask' ['(' vars ')'] u observable | 'fuse' x observable
  observable is parenthesised unless it is a single token.

  ccs terms:  a? input, a! output, a^ autonomous, tau^, '.', '+', '|',
              'A says (...)', defined names.
  ltl:        atoms aρ, true, false, !, X, <>, [], U, /\, \/.
  pcl:        atoms p, facts !p, 'A says' a tightest, /\, \/, ->, -->>.

  Identifiers starting with an upper-case letter are principal names,
  sN (N numeric) are session names, everything else is a variable.
  Delimited variables must be pairwise distinct across the whole file.
*/

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "co2/ccs/model.hpp"
#include "co2/pcl/model.hpp"
#include "co2/runtime/system.hpp"
#include "co2/syntax/lexer.hpp"

namespace co2::syntax {

template <class M>
struct SourceContract;

template <>
struct SourceContract<ccs::CcsModel> {
    using Type = ccs::TermPtr;
};

template <>
struct SourceContract<pcl::PclModel> {
    using Type = pcl::FormulaPtr;
};

template <ContractModel M>
struct ParsedFile {
    using Model = M;
    runtime::Env<M> env;
    runtime::SystemState<M> system;
};

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kws{
        "model", "system", "def",  "rec",  "let",   "proc", "tell",
        "ask",   "fuse",   "do",   "tau",  "true",  "false", "says"};
    return kws;
}

template <ContractModel M>
class Parser {
  public:
    explicit Parser(const std::string& src) : toks_(lex(src)) {}

    ParsedFile<M> file() {
        expect_word("model");
        Token which = expect(Tok::Ident, "a model name");
        if (which.text != M::name())
            fail(which.span, "file declares model " + which.text +
                                 " but was parsed as " + M::name());
        runtime::SystemTermPtr<M> sys;
        bool have_system = false;
        while (!at(Tok::End)) {
            Token head = expect(Tok::Ident, "a declaration");
            if (head.text == "def" || head.text == "rec") {
                parse_def(head);
            } else if (head.text == "let") {
                Token name = name_token("an abbreviation name");
                expect(Tok::Eq, "'='");
                if (lets_.count(name.text))
                    fail(name.span, "duplicate let " + name.text);
                lets_.emplace(name.text, contract_source());
            } else if (head.text == "proc") {
                parse_proc();
            } else if (head.text == "system") {
                if (have_system) fail(head.span, "duplicate system block");
                have_system = true;
                expect(Tok::LBrace, "'{'");
                sys = system_body();
                expect(Tok::RBrace, "'}'");
            } else {
                fail(head.span,
                     "expected def, rec, let, proc or system, got " +
                         head.text);
            }
        }
        if (!have_system)
            fail(toks_.back().span, "missing system block");
        finish_validation();
        ParsedFile<M> out;
        out.env = std::move(env_);
        out.system = runtime::congruence_normalise<M>(sys);
        return out;
    }

    typename M::Contract contract_only() {
        auto c = contract_value();
        expect(Tok::End, "end of input");
        finish_validation();
        return c;
    }

    typename M::Observable observable_only() {
        auto o = observable();
        expect(Tok::End, "end of input");
        return o;
    }

    // Contracts parsed standalone may refer to defining equations of a
    // separately parsed file.
    void adopt_context(const runtime::Env<M>& env) {
        if constexpr (std::is_same_v<M, ccs::CcsModel>)
            env_.model.defs = env.model.defs;
    }
    const runtime::Env<M>& env() const { return env_; }

  private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    runtime::Env<M> env_;
    std::map<std::string, typename SourceContract<M>::Type> lets_;
    std::map<std::string, Span> binders_;
    std::set<std::string> refs_seen_;

    // ----- token helpers -----

    const Token& peek(std::size_t k = 0) const {
        std::size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_word(const char* w) const {
        return at(Tok::Ident) && peek().text == w;
    }
    Token eat() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    [[noreturn]] void fail(const Span& span, const std::string& msg) const {
        throw ParseError({Diagnostic{Severity::Error, span, msg, ""}});
    }
    Token expect(Tok k, const std::string& what) {
        if (!at(k))
            fail(peek().span, "expected " + what + ", got " +
                                  (at(Tok::Ident) ? peek().text
                                                  : describe(peek().kind)));
        return eat();
    }
    void expect_word(const char* w) {
        Token t = expect(Tok::Ident, std::string("'") + w + "'");
        if (t.text != w)
            fail(t.span, std::string("expected '") + w + "', got " + t.text);
    }
    Token name_token(const std::string& what) {
        Token t = expect(Tok::Ident, what);
        if (keywords().count(t.text))
            fail(t.span, t.text + " is a keyword");
        if (!std::isalpha(static_cast<unsigned char>(t.text[0])) &&
            t.text[0] != '_')
            fail(t.span, t.text + " is not a valid name");
        return t;
    }
    void register_binder(const Token& var) {
        if (is_principal_name(var.text))
            fail(var.span, "cannot delimit the principal name " + var.text);
        auto [it, fresh] = binders_.emplace(var.text, var.span);
        (void)it;
        if (!fresh)
            fail(var.span, "binder " + var.text +
                               " is reused; delimited variables must be "
                               "pairwise distinct");
    }

    // ----- declarations -----

    void parse_def(const Token& head) {
        if constexpr (std::is_same_v<M, ccs::CcsModel>) {
            Token name = name_token("a definition name");
            expect(Tok::Eq, "'='");
            if (env_.model.defs.count(name.text))
                fail(name.span, "duplicate definition " + name.text);
            env_.model.defs.emplace(name.text, ccs_par());
        } else {
            fail(head.span,
                 "defining equations are only available in the ccs model");
        }
    }

    void parse_proc() {
        Token name = name_token("a process name");
        runtime::ProcEq<M> eq;
        if (at(Tok::LParen)) {
            eat();
            if (!at(Tok::RParen)) {
                while (true) {
                    Token p = name_token("a parameter");
                    if (std::find(eq.params.begin(), eq.params.end(),
                                  p.text) != eq.params.end())
                        fail(p.span, "duplicate parameter " + p.text);
                    eq.params.push_back(p.text);
                    if (!at(Tok::Comma)) break;
                    eat();
                }
            }
            expect(Tok::RParen, "')'");
        }
        expect(Tok::Eq, "'='");
        eq.body = process();
        if (env_.procs.count(name.text))
            fail(name.span, "duplicate process " + name.text);
        env_.procs.emplace(name.text, std::move(eq));
    }

    void finish_validation() {
        if constexpr (std::is_same_v<M, ccs::CcsModel>) {
            ccs::validate_defs(env_.model.defs);
            for (const auto& r : refs_seen_)
                if (!env_.model.defs.count(r))
                    throw Error("undefined contract name " + r);
        }
        runtime::validate_proc_defs<M>(env_.procs);
    }

    // ----- system -----

    runtime::SystemTermPtr<M> system_body() {
        if (at(Tok::RBrace)) return runtime::sys_zero<M>();
        std::vector<runtime::SystemTermPtr<M>> parts{system_item()};
        while (at(Tok::Pipe)) {
            eat();
            parts.push_back(system_item());
        }
        return runtime::sys_par<M>(std::move(parts));
    }

    runtime::SystemTermPtr<M> system_item() {
        if (at(Tok::LParen)) {
            if (peek(1).kind == Tok::Ident && peek(2).kind == Tok::RParen) {
                eat();
                Token var = name_token("a delimited variable");
                register_binder(var);
                eat();  // ')'
                runtime::SystemTermPtr<M> body;
                if (at(Tok::LParen) && peek(1).kind == Tok::Ident &&
                    peek(2).kind == Tok::RParen) {
                    body = system_item();  // chained delimiter
                } else {
                    expect(Tok::LParen, "'('");
                    body = system_body_until_rparen();
                    expect(Tok::RParen, "')'");
                }
                return runtime::sys_delim<M>(var.text, body);
            }
            eat();
            auto body = system_body_until_rparen();
            expect(Tok::RParen, "')'");
            return body;
        }
        Token name = expect(Tok::Ident, "an agent or session name");
        if (name.text == "0") return runtime::sys_zero<M>();
        expect(Tok::LBrack, "'['");
        if (is_session_name(name.text)) {
            auto c = contract_value();
            expect(Tok::RBrack, "']'");
            auto composed = M::compose({c}, env_.model);
            return runtime::sys_session<M>(name.text, std::move(composed));
        }
        if (!is_principal_name(name.text))
            fail(name.span, name.text + " is not a principal name");
        auto p = process();
        expect(Tok::RBrack, "']'");
        return runtime::sys_agent<M>(name.text, p);
    }

    runtime::SystemTermPtr<M> system_body_until_rparen() {
        std::vector<runtime::SystemTermPtr<M>> parts{system_item()};
        while (at(Tok::Pipe)) {
            eat();
            parts.push_back(system_item());
        }
        return runtime::sys_par<M>(std::move(parts));
    }

    // ----- processes -----

    runtime::ProcessPtr<M> process() {
        std::vector<runtime::ProcessPtr<M>> parts{proc_sum()};
        while (at(Tok::Pipe)) {
            eat();
            parts.push_back(proc_sum());
        }
        return parts.size() == 1 ? parts[0] : runtime::p_par<M>(std::move(parts));
    }

    runtime::ProcessPtr<M> proc_sum() {
        Span at_span = peek().span;
        runtime::ProcessPtr<M> first = proc_item();
        if (!at(Tok::Plus)) return first;
        std::vector<runtime::ProcBranch<M>> branches = summands(first, at_span);
        while (at(Tok::Plus)) {
            eat();
            Span s = peek().span;
            auto more = summands(proc_item(), s);
            branches.insert(branches.end(), more.begin(), more.end());
        }
        return runtime::p_sum<M>(std::move(branches));
    }

    std::vector<runtime::ProcBranch<M>> summands(
        const runtime::ProcessPtr<M>& p, const Span& span) {
        if (p->kind != runtime::Process<M>::Kind::Sum || p->branches.empty())
            fail(span, "only prefixed processes can be summed");
        return p->branches;
    }

    runtime::ProcessPtr<M> proc_item() {
        if (at(Tok::LParen)) {
            if (peek(1).kind == Tok::Ident && peek(2).kind == Tok::RParen &&
                peek(3).kind == Tok::LParen) {
                eat();
                Token var = name_token("a delimited variable");
                register_binder(var);
                eat();  // ')'
                eat();  // '('
                auto body = process();
                expect(Tok::RParen, "')'");
                return runtime::p_delim<M>(var.text, body);
            }
            eat();
            auto p = process();
            expect(Tok::RParen, "')'");
            return p;
        }
        if (at(Tok::LBrack)) {
            eat();
            Token var = name_token("a latent contract variable");
            expect(Tok::RBrack, "']'");
            expect(Tok::LParen, "'('");
            auto c = contract_value();
            expect(Tok::RParen, "')'");
            return runtime::p_latent<M>(var.text, std::move(c));
        }
        Token head = expect(Tok::Ident, "a process");
        if (head.text == "0") return runtime::p_zero<M>();
        if (head.text == "tau")
            return runtime::p_prefixed<M>(runtime::pre_tau<M>(), continuation());
        if (head.text == "do") {
            Token u = name_token("a session variable or name");
            if (is_principal_name(u.text))
                fail(u.span, "cannot act on the principal name " + u.text);
            auto a = action();
            return runtime::p_prefixed<M>(runtime::pre_do<M>(u.text, a),
                                          continuation());
        }
        if (head.text == "tell") {
            Token target = name_token("a principal or variable");
            if (is_session_name(target.text))
                fail(target.span, "cannot tell the session name " + target.text);
            expect(Tok::LBrack, "'['");
            Token var = name_token("a latent contract variable");
            if (is_name(var.text))
                fail(var.span, var.text + " is not a variable");
            expect(Tok::RBrack, "']'");
            expect(Tok::LParen, "'('");
            auto c = contract_value();
            expect(Tok::RParen, "')'");
            return runtime::p_prefixed<M>(
                runtime::pre_tell<M>(target.text, var.text, std::move(c)),
                continuation());
        }
        if (head.text == "ask") {
            std::vector<Ident> vars;
            if (at(Tok::LParen)) {
                eat();
                while (true) {
                    Token v = name_token("a variable");
                    if (is_name(v.text))
                        fail(v.span, v.text + " is not a variable");
                    vars.push_back(v.text);
                    if (!at(Tok::Comma)) break;
                    eat();
                }
                expect(Tok::RParen, "')'");
            }
            Token u = name_token("a session variable or name");
            if (is_principal_name(u.text))
                fail(u.span, "cannot ask the principal name " + u.text);
            auto o = observable_arg();
            return runtime::p_prefixed<M>(
                runtime::pre_ask<M>(u.text, std::move(vars), std::move(o)),
                continuation());
        }
        if (head.text == "fuse") {
            Token var = name_token("a session variable");
            if (is_name(var.text))
                fail(var.span, var.text + " is not a variable");
            auto o = observable_arg();
            return runtime::p_prefixed<M>(
                runtime::pre_fuse<M>(var.text, std::move(o)), continuation());
        }
        if (keywords().count(head.text))
            fail(head.span, "unexpected keyword " + head.text);
        std::vector<Ident> args;
        if (at(Tok::LParen)) {
            eat();
            if (!at(Tok::RParen)) {
                while (true) {
                    args.push_back(name_token("an argument").text);
                    if (!at(Tok::Comma)) break;
                    eat();
                }
            }
            expect(Tok::RParen, "')'");
        }
        return runtime::p_call<M>(head.text, std::move(args));
    }

    runtime::ProcessPtr<M> continuation() {
        if (!at(Tok::Dot)) return runtime::p_zero<M>();
        eat();
        return proc_item();
    }

    // ----- model-specific pieces -----

    typename M::Action action() {
        if constexpr (std::is_same_v<M, ccs::CcsModel>) {
            return ccs_atom();
        } else {
            return name_token("an action").text;
        }
    }

    typename M::Contract contract_value() {
        if constexpr (std::is_same_v<M, ccs::CcsModel>) {
            return ccs::canonicalise(ccs_par());
        } else {
            auto f = pcl_formula();
            pcl::validate_contract(f);
            return f;
        }
    }

    typename SourceContract<M>::Type contract_source() {
        if constexpr (std::is_same_v<M, ccs::CcsModel>) {
            return ccs_par();
        } else {
            return pcl_formula();
        }
    }

    typename M::Observable observable() {
        if constexpr (std::is_same_v<M, ccs::CcsModel>) {
            return ltl_or();
        } else {
            return pcl_formula();
        }
    }

    // Unparenthesised observables are single tokens: a constant, an
    // atom, or a fact.
    typename M::Observable observable_arg() {
        if (at(Tok::LParen)) {
            eat();
            auto o = observable();
            expect(Tok::RParen, "')'");
            return o;
        }
        if constexpr (std::is_same_v<M, ccs::CcsModel>) {
            if (at_word("true")) return eat(), ccs::ltl_true();
            if (at_word("false")) return eat(), ccs::ltl_false();
            return ccs::ltl_atom(ccs_atom());
        } else {
            if (at_word("true")) return eat(), pcl::f_true();
            if (at_word("false")) return eat(), pcl::f_false();
            bool fact = at(Tok::Bang);
            if (fact) eat();
            Token name = name_token("an atom");
            return pcl::f_atom(fact ? pcl::fact(name.text)
                                    : pcl::promise(name.text));
        }
    }

    // ----- ccs contracts -----

    ccs::TermPtr ccs_par() {
        std::vector<ccs::TermPtr> parts{ccs_sum()};
        while (at(Tok::Pipe)) {
            eat();
            parts.push_back(ccs_sum());
        }
        return parts.size() == 1 ? parts[0] : ccs::par(std::move(parts));
    }

    ccs::TermPtr ccs_sum() {
        Span span = peek().span;
        ccs::TermPtr first = ccs_item();
        if (!at(Tok::Plus)) return first;
        std::vector<ccs::Branch> branches = ccs_summands(first, span);
        while (at(Tok::Plus)) {
            eat();
            Span s = peek().span;
            auto more = ccs_summands(ccs_item(), s);
            branches.insert(branches.end(), more.begin(), more.end());
        }
        return ccs::sum(std::move(branches));
    }

    std::vector<ccs::Branch> ccs_summands(const ccs::TermPtr& t,
                                          const Span& span) {
        if (t->kind != ccs::Term::Kind::Sum || t->branches.empty())
            fail(span, "only prefixed contract terms can be summed");
        return t->branches;
    }

    ccs::TermPtr ccs_item() {
        if (at(Tok::LParen)) {
            eat();
            auto t = ccs_par();
            expect(Tok::RParen, "')'");
            return t;
        }
        Token head = expect(Tok::Ident, "a contract term");
        if (head.text == "0") return ccs::zero();
        if (peek().kind == Tok::Ident && peek().text == "says") {
            eat();
            expect(Tok::LParen, "'('");
            auto body = ccs_par();
            expect(Tok::RParen, "')'");
            if (is_session_name(head.text))
                fail(head.span, head.text + " cannot appear in says position");
            return ccs::says(head.text, body);
        }
        if (at(Tok::Quest) || at(Tok::Bang) || at(Tok::Caret)) {
            ccs::Atom a = finish_atom(head);
            if (!at(Tok::Dot)) return ccs::prefix(a, ccs::zero());
            eat();
            return ccs::prefix(a, ccs_item());
        }
        if (head.text == "tau")
            fail(head.span, "tau must be written tau^ in contract terms");
        if (keywords().count(head.text))
            fail(head.span, "unexpected keyword " + head.text);
        if (auto it = lets_.find(head.text); it != lets_.end()) {
            if constexpr (std::is_same_v<M, ccs::CcsModel>) return it->second;
        }
        refs_seen_.insert(head.text);
        return ccs::ref(head.text);
    }

    ccs::Atom ccs_atom() {
        Token head = name_token("an action");
        return finish_atom(head);
    }

    ccs::Atom finish_atom(const Token& head) {
        if (at(Tok::Quest))
            return eat(), ccs::Atom{head.text, ccs::Polarity::Input};
        if (at(Tok::Bang))
            return eat(), ccs::Atom{head.text, ccs::Polarity::Output};
        if (at(Tok::Caret))
            return eat(), ccs::Atom{head.text, ccs::Polarity::Autonomous};
        fail(peek().span,
             "expected a polarity (?, ! or ^) after " + head.text);
    }

    // ----- ltl -----

    ccs::LtlPtr ltl_or() {
        auto a = ltl_and();
        while (at(Tok::OrOp)) {
            eat();
            a = ccs::ltl_or(a, ltl_and());
        }
        return a;
    }

    ccs::LtlPtr ltl_and() {
        auto a = ltl_until();
        while (at(Tok::AndOp)) {
            eat();
            a = ccs::ltl_and(a, ltl_until());
        }
        return a;
    }

    ccs::LtlPtr ltl_until() {
        auto a = ltl_unary();
        while (at_word("U")) {
            eat();
            a = ccs::ltl_until(a, ltl_unary());
        }
        return a;
    }

    ccs::LtlPtr ltl_unary() {
        if (at(Tok::Diamond)) return eat(), ccs::ltl_eventually(ltl_unary());
        if (at(Tok::Box)) return eat(), ccs::ltl_always(ltl_unary());
        if (at(Tok::Bang)) return eat(), ccs::ltl_not(ltl_unary());
        if (at_word("X")) return eat(), ccs::ltl_next(ltl_unary());
        if (at(Tok::LParen)) {
            eat();
            auto a = ltl_or();
            expect(Tok::RParen, "')'");
            return a;
        }
        if (at_word("true")) return eat(), ccs::ltl_true();
        if (at_word("false")) return eat(), ccs::ltl_false();
        return ccs::ltl_atom(ccs_atom());
    }

    // ----- pcl -----

    pcl::FormulaPtr pcl_formula() { return pcl_imp(); }

    pcl::FormulaPtr pcl_imp() {
        auto a = pcl_or();
        if (at(Tok::Arrow)) {
            eat();
            return pcl::f_imp(a, pcl_imp());
        }
        if (at(Tok::CArrow)) {
            eat();
            return pcl::f_cimp(a, pcl_imp());
        }
        return a;
    }

    pcl::FormulaPtr pcl_or() {
        auto a = pcl_and();
        while (at(Tok::OrOp)) {
            eat();
            a = pcl::f_or(a, pcl_and());
        }
        return a;
    }

    pcl::FormulaPtr pcl_and() {
        auto a = pcl_prim();
        while (at(Tok::AndOp)) {
            eat();
            a = pcl::f_and(a, pcl_prim());
        }
        return a;
    }

    pcl::FormulaPtr pcl_prim() {
        if (at(Tok::LParen)) {
            eat();
            auto a = pcl_imp();
            expect(Tok::RParen, "')'");
            return a;
        }
        if (at(Tok::Bang)) {
            eat();
            Token name = name_token("an atom");
            return pcl::f_atom(pcl::fact(name.text));
        }
        Token head = expect(Tok::Ident, "a formula");
        if (head.text == "true") return pcl::f_true();
        if (head.text == "false") return pcl::f_false();
        if (keywords().count(head.text))
            fail(head.span, "unexpected keyword " + head.text);
        if (at_word("says")) {
            eat();
            if (is_session_name(head.text))
                fail(head.span, head.text + " cannot appear in says position");
            if (at(Tok::LParen)) {
                eat();
                auto body = pcl_imp();
                expect(Tok::RParen, "')'");
                return pcl::f_says(head.text, body);
            }
            bool fact = at(Tok::Bang);
            if (fact) eat();
            Token name = name_token("an atom");
            return pcl::f_says(head.text,
                               pcl::f_atom(fact ? pcl::fact(name.text)
                                                : pcl::promise(name.text)));
        }
        if (auto it = lets_.find(head.text); it != lets_.end()) {
            if constexpr (std::is_same_v<M, pcl::PclModel>) return it->second;
        }
        return pcl::f_atom(pcl::promise(head.text));
    }
};

// ---------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------

inline std::string detect_model(const std::string& src) {
    auto toks = lex(src);
    if (toks.size() >= 2 && toks[0].kind == Tok::Ident &&
        toks[0].text == "model" && toks[1].kind == Tok::Ident)
        return toks[1].text;
    throw ParseError({Diagnostic{
        Severity::Error, toks.empty() ? Span{} : toks[0].span,
        "a file must start with 'model ccs' or 'model pcl'", ""}});
}

template <ContractModel M>
ParsedFile<M> parse_file(const std::string& src) {
    Parser<M> p(src);
    return p.file();
}

template <ContractModel M>
typename M::Contract parse_contract_string(const std::string& src,
                                           const runtime::Env<M>* ctx = nullptr) {
    Parser<M> p(src);
    if (ctx) p.adopt_context(*ctx);
    return p.contract_only();
}

template <ContractModel M>
typename M::Observable parse_observable_string(const std::string& src) {
    Parser<M> p(src);
    return p.observable_only();
}

}  // namespace co2::syntax
