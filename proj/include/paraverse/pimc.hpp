#pragma once

#include "paraverse/constraint.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace paraverse::pimc {

// Interval endpoint: a rational in [0,1] or a parameter name.
struct Endpoint {
    bool is_param = false;
    Rational value = 0;
    std::string param;

    static Endpoint of(Rational v) { return Endpoint{false, std::move(v), {}}; }
    static Endpoint of_param(std::string p) { return Endpoint{true, 0, std::move(p)}; }

    bool operator==(const Endpoint& o) const {
        return is_param == o.is_param && value == o.value && param == o.param;
    }
};

struct ParamInterval {
    Endpoint low, up;
};

struct IntervalTransition {
    std::string from, to;
    ParamInterval interval;
};

// Interval Markov chain, possibly with parametric endpoints; params empty
// means a plain IMC. Absent transitions read as the interval [0,0].
struct Pimc {
    std::vector<std::string> states;
    std::string initial;
    std::vector<std::string> props;
    std::map<std::string, std::set<std::string>> labels;
    std::vector<std::string> params;
    std::vector<IntervalTransition> transitions;  // declaration order matters

    bool is_imc() const { return params.empty(); }
    const ParamInterval* interval(const std::string& from, const std::string& to) const;
    // Targets with interval other than [0,0], in declaration order.
    std::vector<std::string> successors(const std::string& from) const;
    bool has_state(const std::string& s) const;
};

struct Mc {
    std::vector<std::string> states;
    std::string initial;
    std::vector<std::string> props;
    std::map<std::string, std::set<std::string>> labels;
    std::map<std::pair<std::string, std::string>, Rational> matrix;

    Rational prob(const std::string& from, const std::string& to) const;
    // Throws if some row does not sum to exactly 1.
    void validate() const;
};

struct invalid_probability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Replaces parameter endpoints; psi must be total with values in [0,1].
Pimc instantiate(const Pimc& p, const Valuation& psi);

// Mass-splitting map for one related state pair: delta[t'][s'] is how much
// of M(t,t') flows into specification transition s -> s'.
struct CorrespondenceWitness {
    std::set<std::pair<std::string, std::string>> relation;
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::map<std::string, Rational>>>
        delta;
};

// Greatest satisfaction relation by iterated refinement; pair feasibility is
// an exact rational linear feasibility problem.
std::pair<bool, std::optional<CorrespondenceWitness>> satisfies(const Mc& mc, const Pimc& imc);

// Bounded consistency on a plain IMC via the pruning characterization:
// keep exactly the (n-1)-consistent successors, everything dropped must have
// lower bound zero, and the kept interval sums must straddle 1.
bool n_consistent(const Pimc& imc, const std::string& s, std::size_t n);

// Consistency plus a same-structure implementation witness: lower bounds
// first, then the residual mass topped up greedily in declaration order.
std::pair<bool, std::optional<Mc>> is_consistent(const Pimc& imc);

// Local-consistency constraint for keeping exactly `keep` out of s's
// successors; parameters stay symbolic, implicitly bounded in [0,1].
ConvexConstraint lc_constraint(const Pimc& p, const std::string& s,
                               const std::set<std::string>& keep);

// All parameter valuations whose instance is consistent, as a union over
// avoid-sets of conjunctions of local-consistency constraints.
ConstraintSet synthesize_consistency(const Pimc& p);

VarContext param_context(const Pimc& p);

}  // namespace paraverse::pimc
