#pragma once

#include "paraverse/linear.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace paraverse {

// Atoms are kept in the normal form  term <= 0  or  term < 0.
// Equalities and >=/> inputs are rewritten on construction:
//   t >= 0  becomes  -t <= 0,   t = 0  becomes the pair {t <= 0, -t <= 0}.
struct AtomicConstraint {
    LinearTerm term;
    bool strict = false;

    bool operator==(const AtomicConstraint& o) const {
        return strict == o.strict && term == o.term;
    }
};

// Relation symbols accepted at the surface level.
enum class Rel { lt, le, eq, ge, gt };

// Conjunction of atoms over a shared context. Not canonicalized: redundant
// atoms are tolerated, unsatisfiability is detected by is_satisfiable.
struct ConvexConstraint {
    VarContext context;
    std::vector<AtomicConstraint> atoms;

    static ConvexConstraint top(VarContext ctx) { return ConvexConstraint{std::move(ctx), {}}; }
    static ConvexConstraint bottom(VarContext ctx);

    // Appends term <rel> 0, expanding eq into two atoms.
    void add(const LinearTerm& term, Rel rel);
    bool mentions(const std::string& var) const;
};

// Finite union of convex constraints over one context. Unsatisfiable
// disjuncts are pruned eagerly.
struct ConstraintSet {
    VarContext context;
    std::vector<ConvexConstraint> disjuncts;

    static ConstraintSet empty(VarContext ctx) { return ConstraintSet{std::move(ctx), {}}; }
    static ConstraintSet whole(VarContext ctx);
    static ConstraintSet of(ConvexConstraint c);

    bool is_empty() const { return disjuncts.empty(); }
    void add_disjunct(ConvexConstraint c);
};

// ---------------------------------------------------------------------------
// Operations on convex constraints
// ---------------------------------------------------------------------------

// Exact evaluation; throws missing_variable_error if val misses a context
// variable.
bool satisfies(const ConvexConstraint& c, const Valuation& val);

// Atom union. No satisfiability check. Throws context_mismatch_error.
ConvexConstraint conjoin(const ConvexConstraint& a, const ConvexConstraint& b);

// Some rational point satisfies all atoms. Decided by eliminating every
// variable (equality substitution first, then Fourier-Motzkin) and checking
// the residual ground atoms.
bool is_satisfiable(const ConvexConstraint& c);

// Exact projection: drops vars from the context; a point satisfies the
// result iff it extends to a point of c. Derived atoms are strict iff either
// parent was strict.
ConvexConstraint eliminate(const ConvexConstraint& c, const std::set<std::string>& vars);

// Future of c under uniform delay on the given clocks: each x becomes x + d
// for one fresh d >= 0, which is then eliminated.
ConvexConstraint time_elapse(const ConvexConstraint& c, const std::set<std::string>& clocks);

// Projects away each var in r, then pins it to zero.
ConvexConstraint reset(const ConvexConstraint& c, const std::set<std::string>& r);

// Replaces a variable by a fixed rational value (context shrinks).
ConvexConstraint substitute(const ConvexConstraint& c, const std::string& var, const Rational& value);

// Largest value of `objective` over c: (bound, strict) with nullopt bound
// meaning unbounded. Precondition: c satisfiable.
struct TermBound {
    std::optional<Rational> value;  // nullopt = unbounded
    bool strict = false;            // meaningful only when value is set
};
TermBound upper_bound(const ConvexConstraint& c, const LinearTerm& objective);
TermBound lower_bound(const ConvexConstraint& c, const LinearTerm& objective);

// Point-set containment of one convex constraint in a finite union,
// by recursive splitting along negated atoms.
bool convex_contained(const ConvexConstraint& inner, const std::vector<ConvexConstraint>& cover);

// A rational point of a satisfiable constraint (nullopt when unsatisfiable),
// found by eliminating variables and back-substituting interval picks.
std::optional<Valuation> sample_point(const ConvexConstraint& c);

// ---------------------------------------------------------------------------
// Operations on constraint sets
// ---------------------------------------------------------------------------

bool satisfies(const ConstraintSet& s, const Valuation& val);
ConstraintSet set_union(ConstraintSet a, const ConstraintSet& b);
ConstraintSet set_conjoin(const ConstraintSet& a, const ConstraintSet& b);
ConstraintSet set_eliminate(const ConstraintSet& s, const std::set<std::string>& vars);

// Every point of b lies in a. Throws context_mismatch_error.
bool set_contains(const ConstraintSet& a, const ConstraintSet& b);
bool set_equal(const ConstraintSet& a, const ConstraintSet& b);

// Cosmetic canonicalization for output: drops implied atoms (checked via
// containment against the single-atom complement) and disjuncts contained in
// the rest of the union. Purely an output aid; engines never rely on it.
ConvexConstraint simplify(const ConvexConstraint& c);
ConstraintSet simplify(const ConstraintSet& s);

// Integer-point search, lexicographic in context order, smallest values
// first, over the box [0, search_bound]^n intersected with per-variable
// projection bounds.
enum class Ternary { yes, no, unknown };

struct IntegerPointResult {
    Ternary verdict = Ternary::unknown;
    std::optional<Valuation> witness;  // set iff verdict == yes
};
IntegerPointResult has_integer_point(const ConvexConstraint& c, long search_bound);

// Rendering helpers (used by the CLI and tests).
std::string to_string(const LinearTerm& t);
std::string to_string(const AtomicConstraint& a);
std::string to_string(const ConvexConstraint& c);
std::string to_string(const ConstraintSet& s);

}  // namespace paraverse
