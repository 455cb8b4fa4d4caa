#include "paraverse/constraint.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <sstream>

namespace paraverse {

namespace {

// Ground atom: no variables left. True under the usual reading of
// constant (<|<=) 0.
bool ground_true(const AtomicConstraint& a) {
    return a.strict ? a.term.constant < 0 : a.term.constant <= 0;
}

AtomicConstraint make_atom(LinearTerm t, bool strict) {
    return AtomicConstraint{std::move(t), strict};
}

// Divides through by the gcd of the coefficients. Keeps the atom exact:
// scaling by a positive rational preserves the solution set and strictness.
void gcd_reduce(AtomicConstraint& a) {
    if (a.term.coeffs.empty()) return;
    Integer g = 0;
    for (const auto& [name, c] : a.term.coeffs) {
        Integer abs_c = abs(c);
        g = g == 0 ? abs_c : gcd(g, abs_c);
    }
    if (g <= 1) return;
    for (auto& [name, c] : a.term.coeffs) c /= g;
    a.term.constant /= Rational(g);
}

std::string coeff_key(const LinearTerm& t) {
    std::string key;
    for (const auto& [name, c] : t.coeffs) {
        key += name;
        key += ':';
        key += c.get_str();
        key += ';';
    }
    return key;
}

// Drops ground-true atoms, merges atoms sharing a coefficient vector
// (keeping the tightest bound), and reports unsatisfiable ground atoms.
// Returns false if a ground atom is violated.
bool normalize_atoms(std::vector<AtomicConstraint>& atoms) {
    std::vector<AtomicConstraint> out;
    std::map<std::string, std::size_t> by_coeffs;
    for (auto& a : atoms) {
        gcd_reduce(a);
        if (a.term.is_constant()) {
            if (!ground_true(a)) return false;
            continue;
        }
        std::string key = coeff_key(a.term);
        auto it = by_coeffs.find(key);
        if (it == by_coeffs.end()) {
            by_coeffs.emplace(std::move(key), out.size());
            out.push_back(std::move(a));
            continue;
        }
        // Both atoms read  coeffs . x  <=|<  -constant : the larger constant
        // is the tighter bound, strictness breaking ties.
        AtomicConstraint& kept = out[it->second];
        if (a.term.constant > kept.term.constant ||
            (a.term.constant == kept.term.constant && a.strict && !kept.strict)) {
            kept = std::move(a);
        }
    }
    atoms = std::move(out);
    return true;
}

void mark_unsat(ConvexConstraint& c) {
    c.atoms.clear();
    c.atoms.push_back(make_atom(LinearTerm::of_constant(1), false));
}

VarContext context_without(const VarContext& ctx, const std::set<std::string>& vars) {
    VarContext out;
    for (const auto& v : ctx)
        if (!vars.count(v.name)) out.push_back(v);
    return out;
}

// Rewrites every atom using the equality  eq.term = 0  solved for `var`.
// Scaling by |coeff(var)| keeps coefficients integral.
void substitute_equality(std::vector<AtomicConstraint>& atoms, const LinearTerm& eq,
                         const std::string& var) {
    Integer c = eq.coeff_of(var);
    assert(c != 0);
    Integer abs_c = abs(c);
    Integer sign = c > 0 ? 1 : -1;
    for (auto& a : atoms) {
        Integer c2 = a.term.coeff_of(var);
        if (c2 == 0) continue;
        LinearTerm t = a.term.scaled(abs_c);
        t += eq.scaled(-c2 * sign);
        assert(t.coeff_of(var) == 0);
        a.term = std::move(t);
    }
}

// Core elimination loop shared by eliminate() and is_satisfiable().
// Returns false if the system became trivially unsatisfiable.
bool fm_eliminate(std::vector<AtomicConstraint>& atoms, std::set<std::string> vars) {
    if (!normalize_atoms(atoms)) return false;
    while (!vars.empty()) {
        // Equality substitution first: a non-strict pair {t<=0, -t<=0}
        // pins t = 0 and eliminates a variable without any atom blowup.
        bool substituted = false;
        {
            std::map<std::string, std::size_t> seen;
            for (std::size_t i = 0; i < atoms.size() && !substituted; ++i) {
                if (atoms[i].strict) continue;
                std::string neg_key = coeff_key(atoms[i].term.negated());
                auto it = seen.find(neg_key);
                if (it != seen.end() && atoms[it->second].term.constant == -atoms[i].term.constant) {
                    const LinearTerm eq = atoms[i].term;
                    for (const auto& [name, coeff] : eq.coeffs) {
                        if (vars.count(name)) {
                            substitute_equality(atoms, eq, name);
                            vars.erase(name);
                            substituted = true;
                            break;
                        }
                    }
                }
                if (!substituted) seen.emplace(coeff_key(atoms[i].term), i);
            }
        }
        if (substituted) {
            if (!normalize_atoms(atoms)) return false;
            continue;
        }

        // Pick the variable with the smallest pos*neg fan-out.
        std::string best;
        std::size_t best_cost = SIZE_MAX;
        for (const auto& v : vars) {
            std::size_t pos = 0, neg = 0;
            for (const auto& a : atoms) {
                Integer c = a.term.coeff_of(v);
                if (c > 0) ++pos;
                else if (c < 0) ++neg;
            }
            std::size_t cost = pos * neg;
            if (cost < best_cost) {
                best_cost = cost;
                best = v;
            }
        }

        std::vector<AtomicConstraint> untouched, upper, lower;
        for (auto& a : atoms) {
            Integer c = a.term.coeff_of(best);
            if (c > 0) upper.push_back(std::move(a));       //  c*v + t <= 0  bounds v above
            else if (c < 0) lower.push_back(std::move(a));  // -c*v - t >= 0  bounds v below
            else untouched.push_back(std::move(a));
        }
        atoms = std::move(untouched);
        for (const auto& up : upper) {
            Integer cu = up.term.coeff_of(best);
            for (const auto& lo : lower) {
                Integer cl = -lo.term.coeff_of(best);
                LinearTerm t = up.term.scaled(cl);
                t += lo.term.scaled(cu);
                atoms.push_back(make_atom(std::move(t), up.strict || lo.strict));
            }
        }
        vars.erase(best);
        if (!normalize_atoms(atoms)) return false;
    }
    return true;
}

}  // namespace

ConvexConstraint ConvexConstraint::bottom(VarContext ctx) {
    ConvexConstraint c{std::move(ctx), {}};
    mark_unsat(c);
    return c;
}

void ConvexConstraint::add(const LinearTerm& term, Rel rel) {
    switch (rel) {
        case Rel::lt: atoms.push_back(make_atom(term, true)); break;
        case Rel::le: atoms.push_back(make_atom(term, false)); break;
        case Rel::ge: atoms.push_back(make_atom(term.negated(), false)); break;
        case Rel::gt: atoms.push_back(make_atom(term.negated(), true)); break;
        case Rel::eq:
            atoms.push_back(make_atom(term, false));
            atoms.push_back(make_atom(term.negated(), false));
            break;
    }
}

bool ConvexConstraint::mentions(const std::string& var) const {
    for (const auto& a : atoms)
        if (a.term.coeff_of(var) != 0) return true;
    return false;
}

ConstraintSet ConstraintSet::whole(VarContext ctx) {
    ConstraintSet s{ctx, {}};
    s.disjuncts.push_back(ConvexConstraint::top(std::move(ctx)));
    return s;
}

ConstraintSet ConstraintSet::of(ConvexConstraint c) {
    ConstraintSet s{c.context, {}};
    s.add_disjunct(std::move(c));
    return s;
}

void ConstraintSet::add_disjunct(ConvexConstraint c) {
    if (c.context != context) throw context_mismatch_error();
    if (is_satisfiable(c)) disjuncts.push_back(std::move(c));
}

bool satisfies(const ConvexConstraint& c, const Valuation& val) {
    for (const auto& v : c.context)
        if (!val.has(v.name)) throw missing_variable_error(v.name);
    for (const auto& a : c.atoms) {
        Rational lhs = val.eval(a.term);
        if (a.strict ? !(lhs < 0) : !(lhs <= 0)) return false;
    }
    return true;
}

ConvexConstraint conjoin(const ConvexConstraint& a, const ConvexConstraint& b) {
    if (a.context != b.context) throw context_mismatch_error();
    ConvexConstraint out = a;
    out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
    return out;
}

bool is_satisfiable(const ConvexConstraint& c) {
    std::vector<AtomicConstraint> atoms = c.atoms;
    std::set<std::string> vars;
    for (const auto& v : c.context) vars.insert(v.name);
    return fm_eliminate(atoms, std::move(vars));
}

ConvexConstraint eliminate(const ConvexConstraint& c, const std::set<std::string>& vars) {
    ConvexConstraint out;
    out.context = context_without(c.context, vars);
    out.atoms = c.atoms;
    if (!fm_eliminate(out.atoms, vars)) mark_unsat(out);
    return out;
}

ConvexConstraint time_elapse(const ConvexConstraint& c, const std::set<std::string>& clocks) {
    // Fresh delay variable: '#' cannot occur in parsed identifiers.
    const std::string delay = "#d";
    ConvexConstraint shifted;
    shifted.context = c.context;
    for (const auto& a : c.atoms) {
        AtomicConstraint b = a;
        Integer dcoef = 0;
        for (const auto& x : clocks) dcoef -= b.term.coeff_of(x);
        b.term.add_var(delay, dcoef);
        shifted.atoms.push_back(std::move(b));
    }
    shifted.atoms.push_back(make_atom(LinearTerm::of_var(delay, -1), false));  // d >= 0
    if (!fm_eliminate(shifted.atoms, {delay})) mark_unsat(shifted);
    return shifted;
}

ConvexConstraint reset(const ConvexConstraint& c, const std::set<std::string>& r) {
    ConvexConstraint projected = eliminate(c, r);
    ConvexConstraint out;
    out.context = c.context;
    out.atoms = std::move(projected.atoms);
    for (const auto& x : r) out.add(LinearTerm::of_var(x), Rel::eq);
    return out;
}

ConvexConstraint substitute(const ConvexConstraint& c, const std::string& var,
                            const Rational& value) {
    ConvexConstraint out;
    out.context = context_without(c.context, {var});
    for (const auto& a : c.atoms) {
        AtomicConstraint b = a;
        Integer coeff = b.term.coeff_of(var);
        if (coeff != 0) {
            b.term.coeffs.erase(var);
            b.term.constant += Rational(coeff) * value;
        }
        out.atoms.push_back(std::move(b));
    }
    if (!normalize_atoms(out.atoms)) mark_unsat(out);
    return out;
}

TermBound upper_bound(const ConvexConstraint& c, const LinearTerm& objective) {
    // Pin a fresh variable to the objective and project everything else away.
    const std::string obj = "#obj";
    ConvexConstraint probe = c;
    probe.context.push_back(Var{obj, VarKind::aux});
    LinearTerm eq = objective;
    eq.add_var(obj, -1);
    probe.add(eq, Rel::eq);
    std::set<std::string> others;
    for (const auto& v : c.context) others.insert(v.name);
    ConvexConstraint residual = eliminate(probe, others);
    TermBound best;
    for (const auto& a : residual.atoms) {
        Integer co = a.term.coeff_of(obj);
        if (co <= 0) continue;  // lower bounds and ground atoms
        Rational bound = -a.term.constant / Rational(co);
        if (!best.value || bound < *best.value ||
            (bound == *best.value && a.strict && !best.strict)) {
            best.value = bound;
            best.strict = a.strict;
        }
    }
    return best;
}

TermBound lower_bound(const ConvexConstraint& c, const LinearTerm& objective) {
    TermBound neg = upper_bound(c, objective.negated());
    if (neg.value) neg.value = -*neg.value;
    return neg;
}

namespace {

// inner ∧ ¬atom, with the negation flipping strictness.
ConvexConstraint with_negated_atom(const ConvexConstraint& base, const AtomicConstraint& a) {
    ConvexConstraint out = base;
    out.atoms.push_back(make_atom(a.term.negated(), !a.strict));
    return out;
}

bool covered_by(const ConvexConstraint& piece, const std::vector<ConvexConstraint>& cover,
                std::size_t from) {
    if (!is_satisfiable(piece)) return true;
    if (from == cover.size()) return false;
    const ConvexConstraint& first = cover[from];
    ConvexConstraint current = piece;
    for (const auto& a : first.atoms) {
        if (!covered_by(with_negated_atom(current, a), cover, from + 1)) return false;
        current.atoms.push_back(a);
    }
    return true;  // current ⊆ first
}

}  // namespace

bool convex_contained(const ConvexConstraint& inner, const std::vector<ConvexConstraint>& cover) {
    return covered_by(inner, cover, 0);
}

std::optional<Valuation> sample_point(const ConvexConstraint& c) {
    if (!is_satisfiable(c)) return std::nullopt;
    // Peel variables one at a time; then assign values back to front, each
    // from the one-variable interval left after substituting later picks.
    std::vector<ConvexConstraint> stages;  // stages[i] mentions vars [i..n)
    stages.push_back(c);
    for (std::size_t i = 0; i + 1 < c.context.size(); ++i)
        stages.push_back(eliminate(stages.back(), {c.context[i].name}));
    Valuation point;
    for (std::size_t i = c.context.size(); i-- > 0;) {
        ConvexConstraint cur = stages[i];
        for (std::size_t j = i + 1; j < c.context.size(); ++j)
            cur = substitute(cur, c.context[j].name, point.at(c.context[j].name));
        const std::string& v = c.context[i].name;
        TermBound hi = upper_bound(cur, LinearTerm::of_var(v));
        TermBound lo = lower_bound(cur, LinearTerm::of_var(v));
        Rational pick;
        if (lo.value && hi.value) {
            pick = *lo.value == *hi.value ? *lo.value : (*lo.value + *hi.value) / 2;
        } else if (lo.value) {
            pick = lo.strict ? *lo.value + 1 : *lo.value;
        } else if (hi.value) {
            pick = hi.strict ? *hi.value - 1 : *hi.value;
        } else {
            pick = 0;
        }
        point.set(v, pick);
    }
    assert(satisfies(c, point));
    return point;
}

bool satisfies(const ConstraintSet& s, const Valuation& val) {
    for (const auto& d : s.disjuncts)
        if (satisfies(d, val)) return true;
    return false;
}

ConstraintSet set_union(ConstraintSet a, const ConstraintSet& b) {
    if (a.context != b.context) throw context_mismatch_error();
    for (const auto& d : b.disjuncts) a.add_disjunct(d);
    return a;
}

ConstraintSet set_conjoin(const ConstraintSet& a, const ConstraintSet& b) {
    if (a.context != b.context) throw context_mismatch_error();
    ConstraintSet out = ConstraintSet::empty(a.context);
    for (const auto& da : a.disjuncts)
        for (const auto& db : b.disjuncts) out.add_disjunct(conjoin(da, db));
    return out;
}

ConstraintSet set_eliminate(const ConstraintSet& s, const std::set<std::string>& vars) {
    ConstraintSet out = ConstraintSet::empty(context_without(s.context, vars));
    for (const auto& d : s.disjuncts) out.add_disjunct(eliminate(d, vars));
    return out;
}

bool set_contains(const ConstraintSet& a, const ConstraintSet& b) {
    if (a.context != b.context) throw context_mismatch_error();
    for (const auto& d : b.disjuncts)
        if (!convex_contained(d, a.disjuncts)) return false;
    return true;
}

bool set_equal(const ConstraintSet& a, const ConstraintSet& b) {
    return set_contains(a, b) && set_contains(b, a);
}

ConvexConstraint simplify(const ConvexConstraint& c) {
    ConvexConstraint out = c;
    if (!normalize_atoms(out.atoms)) {
        mark_unsat(out);
        return out;
    }
    // An atom is implied when the rest of the constraint cannot escape it.
    for (std::size_t i = 0; i < out.atoms.size();) {
        ConvexConstraint rest = out;
        rest.atoms.erase(rest.atoms.begin() + static_cast<long>(i));
        if (!is_satisfiable(with_negated_atom(rest, out.atoms[i])))
            out.atoms.erase(out.atoms.begin() + static_cast<long>(i));
        else
            ++i;
    }
    return out;
}

ConstraintSet simplify(const ConstraintSet& s) {
    ConstraintSet out = ConstraintSet::empty(s.context);
    for (const auto& d : s.disjuncts) out.add_disjunct(simplify(d));
    // Drop disjuncts covered by the rest of the union.
    for (std::size_t i = 0; i < out.disjuncts.size();) {
        std::vector<ConvexConstraint> others;
        for (std::size_t j = 0; j < out.disjuncts.size(); ++j)
            if (j != i) others.push_back(out.disjuncts[j]);
        if (!others.empty() && convex_contained(out.disjuncts[i], others))
            out.disjuncts.erase(out.disjuncts.begin() + static_cast<long>(i));
        else
            ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Integer points
// ---------------------------------------------------------------------------

namespace {

struct NatRange {
    Integer lo;          // first candidate (>= 0)
    Integer hi;          // last candidate, valid only when has_candidates
    bool has_candidates = false;
    bool clipped = false;     // true bound extends past the search box
    bool definitely_empty = false;  // projection fully examined, no naturals
};

NatRange natural_range(const ConvexConstraint& c, const std::string& var, long search_bound) {
    LinearTerm t = LinearTerm::of_var(var);
    TermBound up = upper_bound(c, t);
    TermBound lo = lower_bound(c, t);
    NatRange r;
    Integer first = 0;
    if (lo.value) {
        Integer f = rat_ceil(*lo.value);
        if (lo.strict && Rational(f) == *lo.value) f += 1;
        if (f > 0) first = f;
    }
    Integer last;
    bool last_finite = false;
    if (up.value) {
        last = rat_floor(*up.value);
        if (up.strict && Rational(last) == *up.value) last -= 1;
        last_finite = true;
    }
    if (last_finite && last < first) {
        // No naturals at all in the projection; the search box played no role.
        r.definitely_empty = true;
        return r;
    }
    r.lo = first;
    if (!last_finite || last > search_bound) {
        r.clipped = true;
        r.hi = search_bound;
    } else {
        r.hi = last;
    }
    r.has_candidates = r.lo <= r.hi;
    if (!r.has_candidates && !r.clipped) r.definitely_empty = true;
    return r;
}

bool integer_dfs(const ConvexConstraint& c, const VarContext& order, std::size_t idx,
                 long search_bound, Valuation& partial, bool& clipped_anywhere) {
    if (idx == order.size()) return is_satisfiable(c);
    const std::string& var = order[idx].name;
    NatRange r = natural_range(c, var, search_bound);
    if (r.clipped) clipped_anywhere = true;
    if (r.definitely_empty || !r.has_candidates) return false;
    for (Integer v = r.lo; v <= r.hi; ++v) {
        ConvexConstraint next = substitute(c, var, Rational(v));
        if (!is_satisfiable(next)) continue;
        partial.set(var, Rational(v));
        if (integer_dfs(next, order, idx + 1, search_bound, partial, clipped_anywhere))
            return true;
        partial.values.erase(var);
    }
    return false;
}

}  // namespace

IntegerPointResult has_integer_point(const ConvexConstraint& c, long search_bound) {
    IntegerPointResult res;
    if (search_bound < 0) search_bound = 0;
    if (!is_satisfiable(c)) {
        res.verdict = Ternary::no;
        return res;
    }
    // A single variable whose fully-examined projection holds no natural
    // number already settles the answer, even if other directions are
    // unbounded.
    for (const auto& v : c.context) {
        NatRange r = natural_range(c, v.name, search_bound);
        if (r.definitely_empty) {
            res.verdict = Ternary::no;
            return res;
        }
    }
    Valuation witness;
    bool clipped = false;
    if (integer_dfs(c, c.context, 0, search_bound, witness, clipped)) {
        assert(satisfies(c, witness));
        res.verdict = Ternary::yes;
        res.witness = std::move(witness);
        return res;
    }
    res.verdict = clipped ? Ternary::unknown : Ternary::no;
    return res;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string to_string(const LinearTerm& t) {
    std::ostringstream oss;
    bool first = true;
    for (const auto& [name, c] : t.coeffs) {
        if (c > 0 && !first) oss << " + ";
        if (c < 0) oss << (first ? "-" : " - ");
        Integer a = abs(c);
        if (a != 1) oss << a.get_str() << "*";
        oss << name;
        first = false;
    }
    if (t.constant != 0 || first) {
        if (!first) oss << (t.constant < 0 ? " - " : " + ");
        Rational a = t.constant < 0 && !first ? Rational(-t.constant) : t.constant;
        oss << rat_to_string(a);
    }
    return oss.str();
}

std::string to_string(const AtomicConstraint& a) {
    // Split  t (<=|<) 0  into positive-side <= negative-side for readability.
    LinearTerm lhs, rhs;
    for (const auto& [name, c] : a.term.coeffs) {
        if (c > 0) lhs.add_var(name, c);
        else rhs.add_var(name, -c);
    }
    if (a.term.constant > 0) lhs.constant = a.term.constant;
    else rhs.constant = -a.term.constant;
    if (lhs.coeffs.empty() && lhs.constant == 0 && !rhs.coeffs.empty())
        return to_string(rhs) + (a.strict ? " > " : " >= ") + "0";
    return to_string(lhs) + (a.strict ? " < " : " <= ") + to_string(rhs);
}

std::string to_string(const ConvexConstraint& c) {
    if (c.atoms.empty()) return "true";
    std::string out;
    for (std::size_t i = 0; i < c.atoms.size(); ++i) {
        if (i) out += " && ";
        out += to_string(c.atoms[i]);
    }
    return out;
}

std::string to_string(const ConstraintSet& s) {
    if (s.disjuncts.empty()) return "false";
    std::string out;
    for (std::size_t i = 0; i < s.disjuncts.size(); ++i) {
        if (i) out += "  ||  ";
        out += "(" + to_string(s.disjuncts[i]) + ")";
    }
    return out;
}

}  // namespace paraverse
