#pragma once

#include "paraverse/constraint.hpp"
#include "paraverse/mts.hpp"
#include "paraverse/pimc.hpp"
#include "paraverse/ppn.hpp"
#include "paraverse/pta.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace paraverse::io {

struct SourceSpan {
    std::string file;
    int line = 1;    // 1-based
    int column = 1;  // 1-based
    int length = 1;
};

struct ParseError : std::runtime_error {
    SourceSpan span;
    std::string expected;  // token hint, may be empty

    ParseError(SourceSpan s, const std::string& message, std::string expected_hint = "")
        : std::runtime_error(message), span(std::move(s)), expected(std::move(expected_hint)) {}
};

std::string format_error(const ParseError& e);

// ---------------------------------------------------------------------------
// Lexer shared by the model, constraint, query and formula grammars.
// ---------------------------------------------------------------------------

enum class TokKind { ident, number, punct, end };

struct Token {
    TokKind kind = TokKind::end;
    std::string text;  // identifier text, number literal, or punctuation
    SourceSpan span;
};

class Lexer {
  public:
    Lexer(std::string text, std::string file = "<input>");

    const Token& peek() const { return current_; }
    Token next();

    // Convenience: accept/expect specific tokens.
    bool at(const std::string& punct_or_kw) const;
    bool accept(const std::string& punct_or_kw);
    Token expect(const std::string& punct_or_kw);
    Token expect_ident(const std::string& what);

    [[noreturn]] void fail(const std::string& message, const std::string& expected = "") const;

  private:
    void advance();

    std::string text_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token current_;
};

// Parses `2*p1 <= p2 && x2 - x1 = p3` over the given context; `true` is the
// empty conjunction. Every mentioned variable must belong to the context.
ConvexConstraint parse_constraint(const std::string& text, const VarContext& ctx,
                                  const std::string& file = "<constraint>");

// Same grammar, starting from an already-open lexer (used by the model
// parsers); stops at the first token that cannot extend the conjunction.
ConvexConstraint parse_constraint(Lexer& lex, const VarContext& ctx);

// Semantic problems are collected across the whole model and reported
// together, after parsing proper has succeeded.
struct semantic_error : std::runtime_error {
    std::vector<std::string> problems;
    explicit semantic_error(std::vector<std::string> ps);
};

// ---------------------------------------------------------------------------
// Model parsers (declaration-per-line, ';'-terminated, '#' comments)
// ---------------------------------------------------------------------------

pta::Pta parse_pta(const std::string& text, const std::string& file = "<pta>");
pimc::Pimc parse_pimc(const std::string& text, const std::string& file = "<pimc>");
mts::Mts parse_mts(const std::string& text, const std::string& file = "<mts>");
ppn::Ppn parse_ppn(const std::string& text, const std::string& file = "<ppn>");

// A chain whose intervals are all numeric points reads as a Markov chain.
pimc::Mc as_mc(const pimc::Pimc& p);

// Round-trip printers.
std::string print_pta(const pta::Pta& a);
std::string print_pimc(const pimc::Pimc& p);
std::string print_mts(const mts::Mts& m);
std::string print_ppn(const ppn::Ppn& n);

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

struct PtaQuery {
    enum class Kind { ef_synth, reach, lu_emptiness, ip_check, classify_lu, ec_check };
    Kind kind = Kind::ef_synth;
    std::set<std::string> targets;
    std::optional<Valuation> at;  // reach / ec-check instantiation point
};

struct PimcQuery {
    enum class Kind { consistency_synth, consistent_at };
    Kind kind = Kind::consistency_synth;
    Valuation at;
};

struct PpnQuery {
    enum class Kind { cover, reach, bounded, simultaneous };
    enum class Mode { plain, exists, forall, at };
    Kind kind = Kind::cover;
    Mode mode = Mode::plain;
    std::map<std::string, std::uint64_t> marking;    // cover / reach
    std::set<std::string> places;                    // simultaneous
    std::map<std::string, std::uint64_t> valuation;  // at
};

PtaQuery parse_pta_query(const std::string& text, const pta::Pta& model);
PimcQuery parse_pimc_query(const std::string& text, const pimc::Pimc& model);
mts::FormulaPtr parse_formula(const std::string& text, const mts::Mts& model);
PpnQuery parse_ppn_query(const std::string& text, const ppn::Ppn& model);

}  // namespace paraverse::io
