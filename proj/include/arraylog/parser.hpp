#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "program.hpp"
#include "types.hpp"

namespace arraylog {

enum class diagnostic_kind {
    syntax,
    arity_mismatch,
    range_restriction,
    unknown_relation,
    edb_rule_head,
};

struct diagnostic {
    diagnostic_kind kind = diagnostic_kind::syntax;
    int line = 0;
    int column = 0;
    std::string message;
};

struct parse_result {
    program prog;
    std::vector<diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

namespace detail {

enum class token_kind {
    ident,
    integer,
    lparen,
    rparen,
    comma,
    period,
    implies,  // :-
    neq,      // !=
    decl,     // .decl
    end,
    bad,
};

struct token {
    token_kind kind = token_kind::end;
    std::string_view text;
    int line = 1;
    int column = 1;
};

class lexer {
public:
    explicit lexer(std::string_view src) : src_(src) {}

    token next() {
        skip_space_and_comments();
        token t;
        t.line = line_;
        t.column = column_;
        if (pos_ >= src_.size()) {
            t.kind = token_kind::end;
            return t;
        }
        char c = src_[pos_];
        if (c == '.') {
            if (src_.substr(pos_, 5) == ".decl" &&
                (pos_ + 5 >= src_.size() || !is_ident_char(src_[pos_ + 5]))) {
                t.kind = token_kind::decl;
                t.text = src_.substr(pos_, 5);
                advance(5);
                return t;
            }
            t.kind = token_kind::period;
            t.text = src_.substr(pos_, 1);
            advance(1);
            return t;
        }
        if (c == '(') return single(t, token_kind::lparen);
        if (c == ')') return single(t, token_kind::rparen);
        if (c == ',') return single(t, token_kind::comma);
        if (c == ':' && peek(1) == '-') {
            t.kind = token_kind::implies;
            t.text = src_.substr(pos_, 2);
            advance(2);
            return t;
        }
        if (c == '!' && peek(1) == '=') {
            t.kind = token_kind::neq;
            t.text = src_.substr(pos_, 2);
            advance(2);
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   std::isdigit(static_cast<unsigned char>(src_[end])))
                ++end;
            t.kind = token_kind::integer;
            t.text = src_.substr(pos_, end - pos_);
            advance(end - pos_);
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() && is_ident_char(src_[end])) ++end;
            t.kind = token_kind::ident;
            t.text = src_.substr(pos_, end - pos_);
            advance(end - pos_);
            return t;
        }
        t.kind = token_kind::bad;
        t.text = src_.substr(pos_, 1);
        advance(1);
        return t;
    }

private:
    static bool is_ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    char peek(std::size_t off) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }

    token single(token& t, token_kind k) {
        t.kind = k;
        t.text = src_.substr(pos_, 1);
        advance(1);
        return t;
    }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
            if (src_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
        }
    }

    void skip_space_and_comments() {
        for (;;) {
            while (pos_ < src_.size() &&
                   std::isspace(static_cast<unsigned char>(src_[pos_])))
                advance(1);
            if (pos_ < src_.size() && src_[pos_] == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
                continue;
            }
            return;
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

struct located_atom {
    atom a;
    int line = 0;
    int column = 0;
};

struct located_rule {
    located_atom head;
    std::vector<located_atom> body;
    std::vector<inequality> constraints;
    int line = 0;
    int column = 0;
};

class parser {
public:
    explicit parser(std::string_view src) : lex_(src) { shift(); }

    parse_result run() {
        while (cur_.kind != token_kind::end) {
            if (cur_.kind == token_kind::decl) {
                parse_decl();
            } else {
                parse_rule();
            }
            if (!result_.diagnostics.empty()) break;
        }
        if (result_.diagnostics.empty()) analyze();
        if (!result_.diagnostics.empty()) result_.prog = {};
        return std::move(result_);
    }

private:
    void shift() { cur_ = lex_.next(); }

    void syntax_error(const std::string& msg) {
        result_.diagnostics.push_back({diagnostic_kind::syntax, cur_.line,
                                       cur_.column, msg});
    }

    bool expect(token_kind k, const char* what) {
        if (cur_.kind != k) {
            syntax_error(std::string("expected ") + what + ", found '" +
                         std::string(cur_.text) + "'");
            return false;
        }
        shift();
        return true;
    }

    void parse_decl() {
        shift();  // .decl
        if (cur_.kind != token_kind::ident) {
            syntax_error("expected relation name after .decl");
            return;
        }
        edb_decl d;
        d.name = std::string(cur_.text);
        int dline = cur_.line, dcol = cur_.column;
        shift();
        if (!expect(token_kind::lparen, "'('")) return;
        if (cur_.kind != token_kind::integer) {
            syntax_error("expected arity");
            return;
        }
        std::uint64_t arity = 0;
        auto [p, ec] = std::from_chars(
            cur_.text.data(), cur_.text.data() + cur_.text.size(), arity);
        if (ec != std::errc{} || arity == 0 || arity > 0xffff) {
            syntax_error("arity must be a small positive integer");
            return;
        }
        d.arity = static_cast<std::uint32_t>(arity);
        shift();
        if (!expect(token_kind::rparen, "')'")) return;

        for (const auto& e : result_.prog.edbs) {
            if (e.name == d.name) {
                if (e.arity != d.arity)
                    result_.diagnostics.push_back(
                        {diagnostic_kind::arity_mismatch, dline, dcol,
                         "relation '" + d.name + "' redeclared with arity " +
                             std::to_string(d.arity) + " (was " +
                             std::to_string(e.arity) + ")"});
                return;
            }
        }
        result_.prog.edbs.push_back(std::move(d));
    }

    // Terms between '(' and ')'; the opening paren is already consumed.
    bool parse_terms(located_atom& out) {
        for (;;) {
            if (cur_.kind == token_kind::ident) {
                out.a.terms.push_back(term::variable(std::string(cur_.text)));
                shift();
            } else if (cur_.kind == token_kind::integer) {
                value_t v = 0;
                auto [p, ec] = std::from_chars(
                    cur_.text.data(), cur_.text.data() + cur_.text.size(), v);
                if (ec != std::errc{} || v == kEmptySlot) {
                    syntax_error("integer literal out of range");
                    return false;
                }
                out.a.terms.push_back(term::constant(v));
                shift();
            } else {
                syntax_error("expected a variable or integer term");
                return false;
            }
            if (cur_.kind == token_kind::comma) {
                shift();
                continue;
            }
            break;
        }
        return expect(token_kind::rparen, "')'");
    }

    bool parse_atom(located_atom& out) {
        out.line = cur_.line;
        out.column = cur_.column;
        if (cur_.kind != token_kind::ident) {
            syntax_error("expected relation name");
            return false;
        }
        out.a.relation = std::string(cur_.text);
        shift();
        if (!expect(token_kind::lparen, "'('")) return false;
        return parse_terms(out);
    }

    void parse_rule() {
        located_rule r;
        r.line = cur_.line;
        r.column = cur_.column;
        if (!parse_atom(r.head)) return;
        if (!expect(token_kind::implies, "':-'")) return;
        for (;;) {
            if (cur_.kind == token_kind::ident) {
                // Could be an atom or the left side of `x != y`.
                token save = cur_;
                std::string name(cur_.text);
                shift();
                if (cur_.kind == token_kind::neq) {
                    shift();
                    if (cur_.kind != token_kind::ident) {
                        syntax_error("expected a variable after '!='");
                        return;
                    }
                    r.constraints.push_back(
                        {name, std::string(cur_.text)});
                    shift();
                } else if (cur_.kind == token_kind::lparen) {
                    located_atom a;
                    a.line = save.line;
                    a.column = save.column;
                    a.a.relation = std::move(name);
                    shift();
                    if (!parse_terms(a)) return;
                    r.body.push_back(std::move(a));
                } else {
                    syntax_error("expected '(' or '!=' after identifier");
                    return;
                }
            } else {
                syntax_error("expected a body atom or constraint");
                return;
            }
            if (cur_.kind == token_kind::comma) {
                shift();
                continue;
            }
            break;
        }
        if (!expect(token_kind::period, "'.'")) return;
        rules_.push_back(std::move(r));
    }

    // Post-parse checks: relation resolution, arity consistency, range
    // restriction. IDB arities are fixed by first appearance.
    void analyze() {
        std::set<std::string> heads;
        for (const auto& r : rules_) heads.insert(r.head.a.relation);

        std::map<std::string, std::uint32_t> arities;
        for (const auto& e : result_.prog.edbs) arities[e.name] = e.arity;

        auto check_atom = [&](const located_atom& la, bool is_head) {
            const std::string& name = la.a.relation;
            if (result_.prog.is_edb(name)) {
                if (is_head) {
                    result_.diagnostics.push_back(
                        {diagnostic_kind::edb_rule_head, la.line, la.column,
                         "EDB relation '" + name +
                             "' cannot appear as a rule head"});
                    return;
                }
            } else if (!heads.count(name)) {
                result_.diagnostics.push_back(
                    {diagnostic_kind::unknown_relation, la.line, la.column,
                     "relation '" + name +
                         "' is neither declared nor derived by any rule"});
                return;
            }
            auto arity = static_cast<std::uint32_t>(la.a.terms.size());
            auto [it, inserted] = arities.emplace(name, arity);
            if (!inserted && it->second != arity)
                result_.diagnostics.push_back(
                    {diagnostic_kind::arity_mismatch, la.line, la.column,
                     "relation '" + name + "' used with arity " +
                         std::to_string(arity) + " but has arity " +
                         std::to_string(it->second)});
        };

        for (const auto& r : rules_) {
            check_atom(r.head, true);
            for (const auto& a : r.body) check_atom(a, false);

            std::set<std::string> body_vars;
            for (const auto& a : r.body)
                for (const auto& t : a.a.terms)
                    if (!t.is_constant) body_vars.insert(t.var);
            for (const auto& t : r.head.a.terms)
                if (!t.is_constant && !body_vars.count(t.var))
                    result_.diagnostics.push_back(
                        {diagnostic_kind::range_restriction, r.head.line,
                         r.head.column,
                         "head variable '" + t.var +
                             "' does not appear in the rule body"});
            for (const auto& c : r.constraints)
                for (const std::string* v : {&c.lhs, &c.rhs})
                    if (!body_vars.count(*v))
                        result_.diagnostics.push_back(
                            {diagnostic_kind::range_restriction, r.line,
                             r.column,
                             "constraint variable '" + *v +
                                 "' does not appear in the rule body"});
        }

        if (!result_.diagnostics.empty()) return;
        for (auto& r : rules_) {
            rule out;
            out.head = std::move(r.head.a);
            for (auto& a : r.body) out.body.push_back(std::move(a.a));
            out.constraints = std::move(r.constraints);
            result_.prog.rules.push_back(std::move(out));
        }
    }

    lexer lex_;
    token cur_;
    parse_result result_;
    std::vector<located_rule> rules_;
};

}  // namespace detail

// Parses the Datalog subset: `.decl name(arity)` EDB declarations, rules
// `Head(...) :- A1(...), ..., x != y, ... .`, and `%` line comments.
// Always returns (never throws on malformed input); failures carry a
// diagnostic with line and column.
inline parse_result parse_program(std::string_view source) {
    return detail::parser(source).run();
}

}  // namespace arraylog
