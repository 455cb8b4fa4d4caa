#include "paraverse/parse.hpp"

#include <cctype>
#include <sstream>

namespace paraverse::io {

std::string format_error(const ParseError& e) {
    std::ostringstream oss;
    oss << e.span.file << ":" << e.span.line << ":" << e.span.column << ": " << e.what();
    if (!e.expected.empty()) oss << " (expected " << e.expected << ")";
    return oss.str();
}

Lexer::Lexer(std::string text, std::string file)
    : text_(std::move(text)), file_(std::move(file)) {
    advance();
}

Token Lexer::next() {
    Token t = current_;
    advance();
    return t;
}

bool Lexer::at(const std::string& s) const {
    return current_.kind != TokKind::end && current_.text == s;
}

bool Lexer::accept(const std::string& s) {
    if (!at(s)) return false;
    advance();
    return true;
}

Token Lexer::expect(const std::string& s) {
    if (!at(s)) fail("unexpected '" + (current_.kind == TokKind::end ? "end of input" : current_.text) + "'", "'" + s + "'");
    return next();
}

Token Lexer::expect_ident(const std::string& what) {
    if (current_.kind != TokKind::ident)
        fail("unexpected '" + (current_.kind == TokKind::end ? "end of input" : current_.text) + "'", what);
    return next();
}

void Lexer::fail(const std::string& message, const std::string& expected) const {
    throw ParseError(current_.span, message, expected);
}

void Lexer::advance() {
    // Skip whitespace and # comments.
    while (pos_ < text_.size()) {
        char c = text_[pos_];
        if (c == '#') {
            while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        } else if (c == '\n') {
            ++pos_;
            ++line_;
            col_ = 1;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos_;
            ++col_;
        } else {
            break;
        }
    }
    current_.span = SourceSpan{file_, line_, col_, 1};
    if (pos_ >= text_.size()) {
        current_.kind = TokKind::end;
        current_.text.clear();
        return;
    }
    char c = text_[pos_];
    auto take = [&](std::size_t n) {
        std::string s = text_.substr(pos_, n);
        pos_ += n;
        col_ += static_cast<int>(n);
        return s;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t n = 0;
        while (pos_ + n < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_ + n])) || text_[pos_ + n] == '_'))
            ++n;
        current_.kind = TokKind::ident;
        current_.text = take(n);
        current_.span.length = static_cast<int>(current_.text.size());
        return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t n = 0;
        bool dot = false;
        while (pos_ + n < text_.size()) {
            char d = text_[pos_ + n];
            if (std::isdigit(static_cast<unsigned char>(d))) { ++n; continue; }
            if (d == '.' && !dot && pos_ + n + 1 < text_.size() &&
                std::isdigit(static_cast<unsigned char>(text_[pos_ + n + 1]))) {
                dot = true;
                ++n;
                continue;
            }
            break;
        }
        current_.kind = TokKind::number;
        current_.text = take(n);
        current_.span.length = static_cast<int>(current_.text.size());
        return;
    }
    // Multi-character operators first.
    for (const char* op : {"<=", ">=", "&&", "||", "->", "=="}) {
        if (text_.compare(pos_, 2, op) == 0) {
            current_.kind = TokKind::punct;
            current_.text = take(2);
            current_.span.length = 2;
            return;
        }
    }
    current_.kind = TokKind::punct;
    current_.text = take(1);
}

// ---------------------------------------------------------------------------
// Constraint grammar:
//   conj  := 'true' | atom ('&&' atom)*
//   atom  := sum rel sum         rel in { <, <=, =, >=, > }
//   sum   := prod (('+'|'-') prod)*
//   prod  := number '*' ident | number | ident
// ---------------------------------------------------------------------------

namespace {

struct TermParser {
    Lexer& lex;
    const VarContext& ctx;

    // Multiplies rational literals into the constant; variables must carry
    // integer coefficients.
    LinearTerm parse_sum() {
        LinearTerm acc = parse_signed_prod(false);
        while (lex.at("+") || lex.at("-")) {
            bool minus = lex.next().text == "-";
            LinearTerm t = parse_signed_prod(minus);
            acc += t;
        }
        return acc;
    }

    LinearTerm parse_signed_prod(bool negate) {
        while (lex.at("-")) {
            negate = !negate;
            lex.next();
        }
        LinearTerm t = parse_prod();
        return negate ? t.negated() : t;
    }

    Rational parse_number() {
        Token tok = lex.next();
        std::string text = tok.text;
        if (lex.at("/")) {
            lex.next();
            if (lex.peek().kind != TokKind::number) lex.fail("malformed rational literal", "denominator");
            text += "/" + lex.next().text;
        }
        auto q = rat_parse(text);
        if (!q) throw ParseError(tok.span, "malformed numeric literal '" + text + "'");
        return *q;
    }

    LinearTerm parse_prod() {
        if (lex.peek().kind == TokKind::number) {
            Token start = lex.peek();
            Rational q = parse_number();
            if (lex.accept("*")) {
                Token var = lex.expect_ident("variable");
                check_var(var);
                if (q.get_den() != 1)
                    throw ParseError(start.span, "variable coefficients must be integers");
                return LinearTerm::of_var(var.text, Integer(q.get_num()));
            }
            return LinearTerm::of_constant(q);
        }
        Token var = lex.expect_ident("variable or number");
        check_var(var);
        return LinearTerm::of_var(var.text, 1);
    }

    void check_var(const Token& tok) const {
        if (!context_has(ctx, tok.text))
            throw ParseError(tok.span, "unknown variable '" + tok.text + "'");
    }
};

Rel parse_rel(Lexer& lex) {
    if (lex.accept("<=")) return Rel::le;
    if (lex.accept(">=")) return Rel::ge;
    if (lex.accept("<")) return Rel::lt;
    if (lex.accept(">")) return Rel::gt;
    if (lex.accept("=") || lex.accept("==")) return Rel::eq;
    lex.fail("expected relation", "one of < <= = >= >");
}

}  // namespace

ConvexConstraint parse_constraint(Lexer& lex, const VarContext& ctx) {
    ConvexConstraint out = ConvexConstraint::top(ctx);
    if (lex.at("true")) {
        lex.next();
        return out;
    }
    TermParser tp{lex, ctx};
    while (true) {
        LinearTerm lhs = tp.parse_sum();
        Rel rel = parse_rel(lex);
        LinearTerm rhs = tp.parse_sum();
        lhs -= rhs;
        out.add(lhs, rel);
        if (!lex.accept("&&")) break;
    }
    return out;
}

ConvexConstraint parse_constraint(const std::string& text, const VarContext& ctx,
                                  const std::string& file) {
    Lexer lex(text, file);
    ConvexConstraint c = parse_constraint(lex, ctx);
    if (lex.peek().kind != TokKind::end) lex.fail("trailing input after constraint");
    return c;
}

}  // namespace paraverse::io

namespace paraverse::io {

semantic_error::semantic_error(std::vector<std::string> ps)
    : std::runtime_error(ps.empty() ? "semantic error"
                                    : "semantic errors:\n  - " + [&ps] {
                                          std::string all;
                                          for (std::size_t i = 0; i < ps.size(); ++i) {
                                              if (i) all += "\n  - ";
                                              all += ps[i];
                                          }
                                          return all;
                                      }()),
      problems(std::move(ps)) {}

namespace {

std::vector<std::string> ident_list(Lexer& lex) {
    std::vector<std::string> out;
    while (lex.peek().kind == TokKind::ident) out.push_back(lex.next().text);
    return out;
}

std::set<std::string> braced_ident_set(Lexer& lex) {
    std::set<std::string> out;
    lex.expect("{");
    if (!lex.at("}")) {
        out.insert(lex.expect_ident("name").text);
        while (lex.accept(",")) out.insert(lex.expect_ident("name").text);
    }
    lex.expect("}");
    return out;
}

Rational expect_rational(Lexer& lex) {
    bool neg = lex.accept("-");
    if (lex.peek().kind != TokKind::number) lex.fail("expected a numeric literal", "number");
    Token tok = lex.next();
    std::string text = tok.text;
    if (lex.accept("/")) {
        if (lex.peek().kind != TokKind::number) lex.fail("malformed rational literal", "denominator");
        text += "/" + lex.next().text;
    }
    auto q = rat_parse(text);
    if (!q) throw ParseError(tok.span, "malformed numeric literal '" + text + "'");
    return neg ? Rational(-*q) : *q;
}

std::uint64_t expect_natural(Lexer& lex) {
    if (lex.peek().kind != TokKind::number) lex.fail("expected a natural number", "number");
    Token tok = lex.next();
    for (char c : tok.text)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError(tok.span, "expected a natural number");
    return std::stoull(tok.text);
}

// Keywords joined with '-', e.g. "ef-synth".
std::string dashed_keyword(Lexer& lex) {
    std::string word = lex.expect_ident("query keyword").text;
    while (lex.at("-")) {
        lex.next();
        word += "-" + lex.expect_ident("query keyword").text;
    }
    return word;
}

Valuation parenthesized_valuation(Lexer& lex) {
    Valuation v;
    lex.expect("(");
    if (!lex.at(")")) {
        do {
            std::string name = lex.expect_ident("parameter name").text;
            lex.expect("=");
            v.set(name, expect_rational(lex));
        } while (lex.accept(","));
    }
    lex.expect(")");
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// PTA
// ---------------------------------------------------------------------------

pta::Pta parse_pta(const std::string& text, const std::string& file) {
    Lexer lex(text, file);
    pta::Pta a;
    if (lex.peek().kind == TokKind::end) lex.fail("empty model file");

    // Constraints are parsed inline against the variables declared so far,
    // which keeps error spans pointing into the original file. Declare
    // clocks and params before the first guard or invariant that uses them.
    while (lex.peek().kind != TokKind::end) {
        Token head = lex.expect_ident("declaration");
        if (head.text == "clocks") {
            for (const auto& name : ident_list(lex)) a.clocks.push_back(Var{name, VarKind::clock});
        } else if (head.text == "params") {
            for (const auto& name : ident_list(lex))
                a.params.push_back(Var{name, VarKind::parameter});
        } else if (head.text == "loc") {
            std::string name = lex.expect_ident("location name").text;
            a.locations.push_back(name);
            if (lex.accept("invariant")) {
                a.invariants[name] = parse_constraint(lex, a.full_context());
            } else {
                a.invariants[name] = ConvexConstraint::top(a.full_context());
            }
        } else if (head.text == "init") {
            a.initial = lex.expect_ident("location name").text;
        } else if (head.text == "accepting") {
            for (const auto& name : ident_list(lex)) a.accepting.insert(name);
        } else if (head.text == "bounds") {
            std::string name = lex.expect_ident("parameter name").text;
            lex.expect("in");
            pta::ParamBounds b;
            bool lo_open = lex.accept("(");
            if (!lo_open) lex.expect("[");
            b.inf_open = lo_open;
            b.inf = expect_rational(lex);
            lex.expect(",");
            b.sup = expect_rational(lex);
            bool hi_open = lex.accept(")");
            if (!hi_open) lex.expect("]");
            b.sup_open = hi_open;
            a.bounds[name] = b;
        } else if (head.text == "edge") {
            pta::Edge e;
            e.source = lex.expect_ident("source location").text;
            lex.expect("->");
            e.target = lex.expect_ident("target location").text;
            lex.expect("sync");
            e.action = lex.expect_ident("action").text;
            e.guard = ConvexConstraint::top(a.full_context());
            if (lex.accept("guard")) e.guard = parse_constraint(lex, a.full_context());
            if (lex.accept("reset")) e.resets = braced_ident_set(lex);
            a.edges.push_back(std::move(e));
        } else {
            throw ParseError(head.span, "unknown declaration '" + head.text + "'");
        }
        lex.expect(";");
    }
    for (const auto& e : a.edges) {
        bool known = false;
        for (const auto& act : a.actions) known |= act == e.action;
        if (!known) a.actions.push_back(e.action);
    }
    // Invariants and guards over partial contexts are widened to the full
    // context once everything is declared (atoms are untouched).
    VarContext ctx = a.full_context();
    for (auto& [loc, inv] : a.invariants) inv.context = ctx;
    for (auto& e : a.edges) e.guard.context = ctx;

    // Second pass: semantic validation, all problems at once.
    std::vector<std::string> problems;
    auto check_guard_shape = [&](const ConvexConstraint& c, const std::string& what) {
        for (const auto& atom : c.atoms) {
            int clock_count = 0;
            bool unit = true;
            for (const auto& x : a.clocks) {
                Integer co = atom.term.coeff_of(x.name);
                if (co != 0) {
                    ++clock_count;
                    if (co != 1 && co != -1) unit = false;
                }
            }
            if (clock_count != 1 || !unit)
                problems.push_back(what + ": every atom needs exactly one clock with unit coefficient");
        }
    };
    if (a.locations.empty()) problems.push_back("no locations declared");
    if (a.initial.empty()) problems.push_back("no init declaration");
    else if (!a.has_location(a.initial)) problems.push_back("init location '" + a.initial + "' undeclared");
    for (const auto& l : a.accepting)
        if (!a.has_location(l)) problems.push_back("accepting location '" + l + "' undeclared");
    for (const auto& e : a.edges) {
        if (!a.has_location(e.source)) problems.push_back("edge source '" + e.source + "' undeclared");
        if (!a.has_location(e.target)) problems.push_back("edge target '" + e.target + "' undeclared");
        for (const auto& r : e.resets)
            if (!context_has(a.clocks, r)) problems.push_back("reset of unknown clock '" + r + "'");
        check_guard_shape(e.guard, "guard on " + e.source + " -> " + e.target);
    }
    for (const auto& [loc, inv] : a.invariants)
        check_guard_shape(inv, "invariant of " + loc);
    if (!problems.empty()) throw semantic_error(std::move(problems));
    return a;
}

std::string print_pta(const pta::Pta& a) {
    std::ostringstream oss;
    oss << "clocks";
    for (const auto& x : a.clocks) oss << " " << x.name;
    oss << ";\n";
    if (!a.params.empty()) {
        oss << "params";
        for (const auto& p : a.params) oss << " " << p.name;
        oss << ";\n";
    }
    for (const auto& l : a.locations)
        oss << "loc " << l << " invariant " << to_string(a.invariant(l)) << ";\n";
    oss << "init " << a.initial << ";\n";
    if (!a.accepting.empty()) {
        oss << "accepting";
        for (const auto& l : a.accepting) oss << " " << l;
        oss << ";\n";
    }
    for (const auto& [p, b] : a.bounds)
        oss << "bounds " << p << " in " << (b.inf_open ? "(" : "[") << rat_to_string(b.inf) << ", "
            << rat_to_string(b.sup) << (b.sup_open ? ")" : "]") << ";\n";
    for (const auto& e : a.edges) {
        oss << "edge " << e.source << " -> " << e.target << " sync " << e.action << " guard "
            << to_string(e.guard);
        if (!e.resets.empty()) {
            oss << " reset {";
            bool first = true;
            for (const auto& r : e.resets) {
                if (!first) oss << ", ";
                oss << r;
                first = false;
            }
            oss << "}";
        }
        oss << ";\n";
    }
    return oss.str();
}

// ---------------------------------------------------------------------------
// pIMC
// ---------------------------------------------------------------------------

namespace {

pimc::Endpoint parse_endpoint(Lexer& lex, const std::vector<std::string>& params) {
    if (lex.peek().kind == TokKind::ident) {
        Token t = lex.next();
        if (std::find(params.begin(), params.end(), t.text) == params.end())
            throw ParseError(t.span, "unknown parameter '" + t.text + "'");
        return pimc::Endpoint::of_param(t.text);
    }
    Token start = lex.peek();
    Rational q = expect_rational(lex);
    if (q < 0 || q > 1) throw ParseError(start.span, "probability endpoint outside [0,1]");
    return pimc::Endpoint::of(q);
}

}  // namespace

pimc::Pimc parse_pimc(const std::string& text, const std::string& file) {
    Lexer lex(text, file);
    pimc::Pimc p;
    if (lex.peek().kind == TokKind::end) lex.fail("empty model file");
    while (lex.peek().kind != TokKind::end) {
        Token head = lex.expect_ident("declaration");
        if (head.text == "params") {
            for (const auto& name : ident_list(lex)) p.params.push_back(name);
        } else if (head.text == "state") {
            std::string name = lex.expect_ident("state name").text;
            p.states.push_back(name);
            if (lex.at("labels")) {
                lex.next();
                auto ls = braced_ident_set(lex);
                for (const auto& l : ls)
                    if (std::find(p.props.begin(), p.props.end(), l) == p.props.end())
                        p.props.push_back(l);
                p.labels[name] = std::move(ls);
            } else {
                p.labels[name] = {};
            }
        } else if (head.text == "init") {
            p.initial = lex.expect_ident("state name").text;
        } else if (head.text == "trans") {
            pimc::IntervalTransition t;
            t.from = lex.expect_ident("state name").text;
            lex.expect("->");
            t.to = lex.expect_ident("state name").text;
            if (lex.accept("[")) {
                t.interval.low = parse_endpoint(lex, p.params);
                lex.expect(",");
                t.interval.up = parse_endpoint(lex, p.params);
                lex.expect("]");
            } else {
                // Point probability shorthand.
                pimc::Endpoint e = parse_endpoint(lex, p.params);
                t.interval.low = e;
                t.interval.up = e;
            }
            p.transitions.push_back(std::move(t));
        } else {
            throw ParseError(head.span, "unknown declaration '" + head.text + "'");
        }
        lex.expect(";");
    }
    if (p.initial.empty() && !p.states.empty()) p.initial = p.states.front();

    std::vector<std::string> problems;
    if (p.states.empty()) problems.push_back("no states declared");
    if (!p.has_state(p.initial)) problems.push_back("initial state '" + p.initial + "' undeclared");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& t : p.transitions) {
        if (!p.has_state(t.from)) problems.push_back("transition from unknown state '" + t.from + "'");
        if (!p.has_state(t.to)) problems.push_back("transition to unknown state '" + t.to + "'");
        if (!seen.insert({t.from, t.to}).second)
            problems.push_back("duplicate transition " + t.from + " -> " + t.to);
    }
    if (!problems.empty()) throw semantic_error(std::move(problems));
    return p;
}

pimc::Mc as_mc(const pimc::Pimc& p) {
    std::vector<std::string> problems;
    pimc::Mc mc;
    mc.states = p.states;
    mc.initial = p.initial;
    mc.props = p.props;
    mc.labels = p.labels;
    for (const auto& t : p.transitions) {
        if (t.interval.low.is_param || t.interval.up.is_param ||
            !(t.interval.low.value == t.interval.up.value)) {
            problems.push_back("transition " + t.from + " -> " + t.to + " is not a point probability");
            continue;
        }
        if (t.interval.low.value != 0) mc.matrix[{t.from, t.to}] = t.interval.low.value;
    }
    if (!problems.empty()) throw semantic_error(std::move(problems));
    mc.validate();
    return mc;
}

std::string print_pimc(const pimc::Pimc& p) {
    std::ostringstream oss;
    if (!p.params.empty()) {
        oss << "params";
        for (const auto& q : p.params) oss << " " << q;
        oss << ";\n";
    }
    for (const auto& s : p.states) {
        oss << "state " << s;
        auto it = p.labels.find(s);
        if (it != p.labels.end() && !it->second.empty()) {
            oss << " labels {";
            bool first = true;
            for (const auto& l : it->second) {
                if (!first) oss << ", ";
                oss << l;
                first = false;
            }
            oss << "}";
        }
        oss << ";\n";
    }
    oss << "init " << p.initial << ";\n";
    auto ep = [](const pimc::Endpoint& e) {
        return e.is_param ? e.param : rat_to_string(e.value);
    };
    for (const auto& t : p.transitions)
        oss << "trans " << t.from << " -> " << t.to << " [" << ep(t.interval.low) << ", "
            << ep(t.interval.up) << "];\n";
    return oss.str();
}

// ---------------------------------------------------------------------------
// MTS
// ---------------------------------------------------------------------------

mts::Mts parse_mts(const std::string& text, const std::string& file) {
    Lexer lex(text, file);
    mts::Mts m;
    struct PendingTrans {
        std::string from, action, to;
        SourceSpan span;
    };
    std::vector<PendingTrans> pending;
    if (lex.peek().kind == TokKind::end) lex.fail("empty model file");
    while (lex.peek().kind != TokKind::end) {
        Token head = lex.expect_ident("declaration");
        if (head.text == "actions") {
            for (const auto& a : ident_list(lex)) m.actions.push_back(a);
        } else if (head.text == "vars") {
            for (const auto& v : ident_list(lex)) m.vars.push_back(v);
        } else if (head.text == "state") {
            std::string name = lex.expect_ident("state name").text;
            m.states.push_back(name);
            if (lex.at("labels")) {
                lex.next();
                auto ls = braced_ident_set(lex);
                for (const auto& l : ls)
                    if (std::find(m.props.begin(), m.props.end(), l) == m.props.end())
                        m.props.push_back(l);
                m.labels[name] = std::move(ls);
            } else {
                m.labels[name] = {};
            }
        } else if (head.text == "init") {
            m.initial = lex.expect_ident("state name").text;
        } else if (head.text == "trans") {
            PendingTrans t;
            t.span = lex.peek().span;
            t.from = lex.expect_ident("state name").text;
            lex.expect("-");
            t.action = lex.expect_ident("action").text;
            lex.expect("->");
            t.to = lex.expect_ident("state name").text;
            pending.push_back(std::move(t));
        } else {
            throw ParseError(head.span, "unknown declaration '" + head.text + "'");
        }
        lex.expect(";");
    }
    if (m.initial.empty() && !m.states.empty()) m.initial = m.states.front();

    std::vector<std::string> problems;
    if (m.states.empty()) problems.push_back("no states declared");
    if (m.actions.empty()) problems.push_back("action alphabet is empty");
    auto state_id = [&](const std::string& s) {
        return std::find(m.states.begin(), m.states.end(), s) - m.states.begin();
    };
    auto action_id = [&](const std::string& a) {
        return std::find(m.actions.begin(), m.actions.end(), a) - m.actions.begin();
    };
    if (std::find(m.states.begin(), m.states.end(), m.initial) == m.states.end())
        problems.push_back("initial state '" + m.initial + "' undeclared");
    for (const auto& t : pending) {
        bool ok = true;
        if (static_cast<std::size_t>(state_id(t.from)) == m.states.size()) {
            problems.push_back("transition from unknown state '" + t.from + "'");
            ok = false;
        }
        if (static_cast<std::size_t>(state_id(t.to)) == m.states.size()) {
            problems.push_back("transition to unknown state '" + t.to + "'");
            ok = false;
        }
        if (static_cast<std::size_t>(action_id(t.action)) == m.actions.size()) {
            problems.push_back("transition over unknown action '" + t.action + "'");
            ok = false;
        }
        if (ok)
            m.transitions.push_back({static_cast<std::size_t>(state_id(t.from)),
                                     static_cast<std::size_t>(action_id(t.action)),
                                     static_cast<std::size_t>(state_id(t.to))});
    }
    if (!problems.empty()) throw semantic_error(std::move(problems));
    return m;
}

std::string print_mts(const mts::Mts& m) {
    std::ostringstream oss;
    oss << "actions";
    for (const auto& a : m.actions) oss << " " << a;
    oss << ";\n";
    if (!m.vars.empty()) {
        oss << "vars";
        for (const auto& v : m.vars) oss << " " << v;
        oss << ";\n";
    }
    for (const auto& s : m.states) {
        oss << "state " << s;
        auto it = m.labels.find(s);
        if (it != m.labels.end() && !it->second.empty()) {
            oss << " labels {";
            bool first = true;
            for (const auto& l : it->second) {
                if (!first) oss << ", ";
                oss << l;
                first = false;
            }
            oss << "}";
        }
        oss << ";\n";
    }
    oss << "init " << m.initial << ";\n";
    for (const auto& t : m.transitions)
        oss << "trans " << m.states[t.from] << " -" << m.actions[t.action] << "-> "
            << m.states[t.to] << ";\n";
    return oss.str();
}

// ---------------------------------------------------------------------------
// PPN
// ---------------------------------------------------------------------------

namespace {

ppn::Weight parse_weight(Lexer& lex, const std::vector<std::string>& params) {
    if (lex.peek().kind == TokKind::ident) {
        Token t = lex.next();
        if (std::find(params.begin(), params.end(), t.text) == params.end())
            throw ParseError(t.span, "unknown parameter '" + t.text + "'");
        return ppn::Weight::of_param(t.text);
    }
    return ppn::Weight::of(expect_natural(lex));
}

std::map<std::string, ppn::Weight> weight_map(Lexer& lex, const std::vector<std::string>& params) {
    std::map<std::string, ppn::Weight> out;
    lex.expect("{");
    if (!lex.at("}")) {
        do {
            std::string place = lex.expect_ident("place name").text;
            lex.expect(":");
            out[place] = parse_weight(lex, params);
        } while (lex.accept(","));
    }
    lex.expect("}");
    return out;
}

}  // namespace

ppn::Ppn parse_ppn(const std::string& text, const std::string& file) {
    Lexer lex(text, file);
    ppn::Ppn n;
    std::vector<std::pair<std::string, std::map<std::string, ppn::Weight>>> pres, posts;
    if (lex.peek().kind == TokKind::end) lex.fail("empty model file");
    while (lex.peek().kind != TokKind::end) {
        Token head = lex.expect_ident("declaration");
        if (head.text == "params") {
            for (const auto& p : ident_list(lex)) n.params.push_back(p);
        } else if (head.text == "place") {
            std::string name = lex.expect_ident("place name").text;
            n.places.push_back(name);
            if (lex.at("init")) {
                lex.next();
                n.initial[name] = parse_weight(lex, n.params);
            }
        } else if (head.text == "trans") {
            std::string name = lex.expect_ident("transition name").text;
            n.transitions.push_back(name);
            if (lex.at("pre")) {
                lex.next();
                pres.emplace_back(name, weight_map(lex, n.params));
            }
            if (lex.at("post")) {
                lex.next();
                posts.emplace_back(name, weight_map(lex, n.params));
            }
        } else {
            throw ParseError(head.span, "unknown declaration '" + head.text + "'");
        }
        lex.expect(";");
    }

    std::vector<std::string> problems;
    auto known_place = [&](const std::string& p) {
        return std::find(n.places.begin(), n.places.end(), p) != n.places.end();
    };
    for (const auto& [t, weights] : pres)
        for (const auto& [place, w] : weights) {
            if (!known_place(place)) problems.push_back("pre arc from unknown place '" + place + "'");
            else n.pre[{place, t}] = w;
        }
    for (const auto& [t, weights] : posts)
        for (const auto& [place, w] : weights) {
            if (!known_place(place)) problems.push_back("post arc to unknown place '" + place + "'");
            else n.post[{place, t}] = w;
        }
    for (const auto& p : n.places)
        for (const auto& t : n.transitions)
            if (p == t) problems.push_back("'" + p + "' is both a place and a transition");
    if (n.places.empty()) problems.push_back("no places declared");
    if (!problems.empty()) throw semantic_error(std::move(problems));
    return n;
}

std::string print_ppn(const ppn::Ppn& n) {
    std::ostringstream oss;
    if (!n.params.empty()) {
        oss << "params";
        for (const auto& p : n.params) oss << " " << p;
        oss << ";\n";
    }
    auto wstr = [](const ppn::Weight& w) {
        return w.is_param ? w.param : std::to_string(w.n);
    };
    for (const auto& p : n.places) {
        oss << "place " << p;
        auto it = n.initial.find(p);
        if (it != n.initial.end()) oss << " init " << wstr(it->second);
        oss << ";\n";
    }
    for (const auto& t : n.transitions) {
        oss << "trans " << t;
        auto side = [&](const std::map<std::pair<std::string, std::string>, ppn::Weight>& arcs,
                        const char* tag) {
            std::string body;
            for (const auto& p : n.places) {
                auto it = arcs.find({p, t});
                if (it == arcs.end()) continue;
                if (!body.empty()) body += ", ";
                body += p + ": " + wstr(it->second);
            }
            return body.empty() ? std::string() : std::string(" ") + tag + " {" + body + "}";
        };
        oss << side(n.pre, "pre") << side(n.post, "post") << ";\n";
    }
    return oss.str();
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

PtaQuery parse_pta_query(const std::string& text, const pta::Pta& model) {
    Lexer lex(text, "<query>");
    PtaQuery q;
    std::string kw = dashed_keyword(lex);
    auto targets = [&] {
        auto ts = braced_ident_set(lex);
        for (const auto& t : ts)
            if (!model.has_location(t)) lex.fail("unknown location '" + t + "'");
        return ts;
    };
    if (kw == "ef-synth") {
        q.kind = PtaQuery::Kind::ef_synth;
        q.targets = targets();
    } else if (kw == "reach") {
        q.kind = PtaQuery::Kind::reach;
        if (lex.at("at")) {
            lex.next();
            q.at = parenthesized_valuation(lex);
        }
        q.targets = targets();
    } else if (kw == "lu-emptiness") {
        q.kind = PtaQuery::Kind::lu_emptiness;
        q.targets = targets();
    } else if (kw == "ip-check") {
        q.kind = PtaQuery::Kind::ip_check;
    } else if (kw == "classify-lu") {
        q.kind = PtaQuery::Kind::classify_lu;
    } else if (kw == "ec-check") {
        q.kind = PtaQuery::Kind::ec_check;
        if (lex.at("at")) {
            lex.next();
            q.at = parenthesized_valuation(lex);
        }
    } else {
        lex.fail("unknown query '" + kw + "'");
    }
    if (lex.peek().kind != TokKind::end) lex.fail("trailing input after query");
    return q;
}

PimcQuery parse_pimc_query(const std::string& text, const pimc::Pimc& model) {
    Lexer lex(text, "<query>");
    PimcQuery q;
    std::string kw = dashed_keyword(lex);
    if (kw == "consistency-synth") {
        q.kind = PimcQuery::Kind::consistency_synth;
    } else if (kw == "consistent") {
        q.kind = PimcQuery::Kind::consistent_at;
        lex.expect("at");
        q.at = parenthesized_valuation(lex);
        for (const auto& p : model.params)
            if (!q.at.has(p)) lex.fail("valuation misses parameter '" + p + "'");
    } else {
        lex.fail("unknown query '" + kw + "'");
    }
    if (lex.peek().kind != TokKind::end) lex.fail("trailing input after query");
    return q;
}

// ---------------------------------------------------------------------------
// pmARCTL formulas
// ---------------------------------------------------------------------------

namespace {

struct FormulaParser {
    Lexer& lex;
    const mts::Mts& model;

    mts::FormulaPtr parse_or() {
        mts::FormulaPtr f = parse_and();
        while (lex.accept("|")) f = mts::Formula::mk_or(f, parse_and());
        return f;
    }

    mts::FormulaPtr parse_and() {
        mts::FormulaPtr f = parse_unary();
        while (lex.accept("&")) f = mts::Formula::mk_and(f, parse_unary());
        return f;
    }

    mts::ActionSpec parse_alpha() {
        mts::ActionSpec a;
        lex.expect("[");
        if (lex.at("{")) {
            Token brace = lex.peek();
            a.acts = braced_ident_set(lex);
            if (a.acts.empty()) throw ParseError(brace.span, "action set must be nonempty");
            for (const auto& act : a.acts)
                if (std::find(model.actions.begin(), model.actions.end(), act) ==
                    model.actions.end())
                    throw ParseError(brace.span, "unknown action '" + act + "'");
        } else {
            Token v = lex.expect_ident("action variable");
            if (std::find(model.vars.begin(), model.vars.end(), v.text) == model.vars.end())
                throw ParseError(v.span, "undeclared variable '" + v.text + "'");
            a.is_var = true;
            a.var = v.text;
        }
        lex.expect("]");
        return a;
    }

    mts::FormulaPtr parse_modal(bool omega) {
        mts::ActionSpec a = parse_alpha();
        if (omega) {
            Token g = lex.expect_ident("G");
            if (g.text != "G") throw ParseError(g.span, "the omega quantifier supports only G");
            return mts::Formula::mk_eg_inf(a, parse_unary());
        }
        if (lex.at("X")) {
            lex.next();
            return mts::Formula::mk_ex(a, parse_unary());
        }
        if (lex.at("G")) {
            lex.next();
            return mts::Formula::mk_eg(a, parse_unary());
        }
        if (lex.at("F")) {
            lex.next();
            return mts::Formula::mk_ef(a, parse_unary());
        }
        if (lex.accept("(")) {
            mts::FormulaPtr lhs = parse_or();
            Token u = lex.expect_ident("U");
            if (u.text != "U") throw ParseError(u.span, "expected U");
            mts::FormulaPtr rhs = parse_or();
            lex.expect(")");
            return mts::Formula::mk_eu(a, lhs, rhs);
        }
        lex.fail("expected a modality", "X, G, F or (phi U psi)");
    }

    mts::FormulaPtr parse_unary() {
        if (lex.accept("!")) return mts::Formula::mk_not(parse_unary());
        if (lex.at("E")) {
            lex.next();
            return parse_modal(false);
        }
        if (lex.at("Ew")) {
            lex.next();
            return parse_modal(true);
        }
        if (lex.accept("(")) {
            mts::FormulaPtr f = parse_or();
            lex.expect(")");
            return f;
        }
        if (lex.at("true")) {
            lex.next();
            return mts::Formula::mk_true(true);
        }
        if (lex.at("false")) {
            lex.next();
            return mts::Formula::mk_true(false);
        }
        Token p = lex.expect_ident("proposition");
        if (std::find(model.props.begin(), model.props.end(), p.text) == model.props.end())
            throw ParseError(p.span, "unknown proposition '" + p.text + "'");
        return mts::Formula::mk_prop(p.text);
    }
};

}  // namespace

mts::FormulaPtr parse_formula(const std::string& text, const mts::Mts& model) {
    Lexer lex(text, "<formula>");
    FormulaParser fp{lex, model};
    mts::FormulaPtr f = fp.parse_or();
    if (lex.peek().kind != TokKind::end) lex.fail("trailing input after formula");
    return f;
}

// ---------------------------------------------------------------------------
// PPN queries
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::uint64_t> marking_literal(Lexer& lex, const ppn::Ppn& model) {
    std::map<std::string, std::uint64_t> out;
    lex.expect("{");
    if (!lex.at("}")) {
        do {
            Token p = lex.expect_ident("place name");
            if (std::find(model.places.begin(), model.places.end(), p.text) == model.places.end())
                throw ParseError(p.span, "unknown place '" + p.text + "'");
            lex.expect(":");
            out[p.text] = expect_natural(lex);
        } while (lex.accept(","));
    }
    lex.expect("}");
    return out;
}

}  // namespace

PpnQuery parse_ppn_query(const std::string& text, const ppn::Ppn& model) {
    Lexer lex(text, "<query>");
    PpnQuery q;
    std::string kw = dashed_keyword(lex);
    if (kw == "cover") {
        q.kind = PpnQuery::Kind::cover;
        q.marking = marking_literal(lex, model);
    } else if (kw == "reach") {
        q.kind = PpnQuery::Kind::reach;
        q.marking = marking_literal(lex, model);
    } else if (kw == "bounded") {
        q.kind = PpnQuery::Kind::bounded;
    } else if (kw == "simultaneous") {
        q.kind = PpnQuery::Kind::simultaneous;
        Token brace = lex.peek();
        q.places = braced_ident_set(lex);
        for (const auto& p : q.places)
            if (std::find(model.places.begin(), model.places.end(), p) == model.places.end())
                throw ParseError(brace.span, "unknown place '" + p + "'");
    } else {
        lex.fail("unknown query '" + kw + "'");
    }
    if (lex.peek().kind == TokKind::ident) {
        Token mode = lex.next();
        if (mode.text == "exists") q.mode = PpnQuery::Mode::exists;
        else if (mode.text == "forall") q.mode = PpnQuery::Mode::forall;
        else if (mode.text == "at") {
            q.mode = PpnQuery::Mode::at;
            lex.expect("(");
            if (!lex.at(")")) {
                do {
                    std::string name = lex.expect_ident("parameter name").text;
                    lex.expect("=");
                    q.valuation[name] = expect_natural(lex);
                } while (lex.accept(","));
            }
            lex.expect(")");
        } else {
            throw ParseError(mode.span, "unknown query mode '" + mode.text + "'");
        }
    }
    if ((q.kind == PpnQuery::Kind::reach || q.kind == PpnQuery::Kind::bounded ||
         q.kind == PpnQuery::Kind::simultaneous) &&
        (q.mode == PpnQuery::Mode::exists || q.mode == PpnQuery::Mode::forall))
        lex.fail("this query supports only plain nets or an explicit valuation");
    if (lex.peek().kind != TokKind::end) lex.fail("trailing input after query");
    return q;
}

}  // namespace paraverse::io
