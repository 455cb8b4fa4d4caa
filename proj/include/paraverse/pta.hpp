#pragma once

#include "paraverse/constraint.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace paraverse::pta {

struct Edge {
    std::string source;
    ConvexConstraint guard;  // over clocks ∪ parameters
    std::string action;
    std::set<std::string> resets;
    std::string target;
};

// Optional per-parameter interval annotation (inf/sup with open ends).
struct ParamBounds {
    Rational inf = 0, sup = 0;
    bool inf_open = false, sup_open = false;
};

struct Pta {
    std::vector<std::string> actions;
    std::vector<std::string> locations;
    std::string initial;
    std::set<std::string> accepting;
    VarContext clocks;      // kind clock
    VarContext params;      // kind parameter
    std::map<std::string, ConvexConstraint> invariants;
    std::vector<Edge> edges;
    std::map<std::string, ParamBounds> bounds;  // optional, may be empty

    VarContext full_context() const;
    std::set<std::string> clock_names() const;
    const ConvexConstraint& invariant(const std::string& loc) const;
    bool has_location(const std::string& loc) const;
};

struct invalid_parameter_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct step_rejected_error : std::runtime_error {
    std::size_t step = 0;
    step_rejected_error(std::size_t step_index, const std::string& why)
        : std::runtime_error("step " + std::to_string(step_index) + " rejected: " + why),
          step(step_index) {}
};

struct empty_initial_state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct not_lu_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Concrete semantics (parameterless models)
// ---------------------------------------------------------------------------

struct ConcreteState {
    std::string location;
    Valuation clock_val;
};

struct ScriptStep {
    Rational delay;
    std::size_t edge;  // index into Pta::edges
};

struct Run {
    std::vector<ConcreteState> states;           // states.size() == steps.size() + 1
    std::vector<ScriptStep> steps;
    Rational total_time = 0;
    bool accepting = false;
};

struct WordsAndTrace {
    std::vector<std::string> word;   // actions in order
    std::vector<std::string> trace;  // l0 a0 l1 a1 ... lm
    bool accepting = false;
};

// Substitutes parameter values everywhere; result has an empty parameter set.
Pta instantiate(const Pta& a, const Valuation& v);

// Validates the script step by step; throws step_rejected_error naming the
// first violated invariant or guard.
Run replay(const Pta& ta, const std::vector<ScriptStep>& script);

WordsAndTrace words_and_trace(const Pta& a, const Run& r);

// ---------------------------------------------------------------------------
// Symbolic semantics
// ---------------------------------------------------------------------------

struct SymbolicState {
    std::string location;
    ConvexConstraint zone;  // over clocks ∪ parameters
};

struct Pzg {
    struct Transition {
        std::size_t source;
        std::size_t edge;  // index into Pta::edges
        std::size_t target;
    };
    std::vector<SymbolicState> states;
    std::vector<Transition> transitions;
    bool complete = false;
    bool depth_bounded = false;
    bool state_bounded = false;
};

struct ExploreLimits {
    std::size_t max_states = 100000;
    std::size_t max_depth = 1000;
};

SymbolicState initial_symbolic(const Pta& a);
std::optional<SymbolicState> succ(const Pta& a, const SymbolicState& s, const Edge& e);

// Breadth-first exploration, edges in declaration order. With subsumption a
// new state is dropped when some stored state of the same location contains
// it; without, only point-set-equal duplicates are dropped.
Pzg explore_pzg(const Pta& a, const ExploreLimits& limits, bool subsumption);

// Zone comparisons restricted to the semantic domain (clocks and timing
// parameters non-negative).
bool zone_contains(const Pta& a, const ConvexConstraint& outer, const ConvexConstraint& inner);
bool zone_equal(const Pta& a, const ConvexConstraint& x, const ConvexConstraint& y);

struct SynthesisResult {
    ConstraintSet constraints;  // over parameters
    bool complete = false;
};

SynthesisResult ef_synthesis(const Pta& a, const std::set<std::string>& targets,
                             const ExploreLimits& limits);

// ---------------------------------------------------------------------------
// Subclasses and decision procedures
// ---------------------------------------------------------------------------

struct LuClassification {
    bool is_lu = false;
    std::set<std::string> lower, upper;  // partition of P when is_lu

    bool l_only() const { return is_lu && upper.empty() && !lower.empty(); }
    bool u_only() const { return is_lu && lower.empty() && !upper.empty(); }
};

LuClassification classify_lu(const Pta& a);

// Emptiness of the reachability valuation set for an L/U model: lower-bound
// parameters pinned to 0, atoms still mentioning an upper-bound parameter
// dropped, then a plain reachability check. Throws not_lu_error.
bool lu_ef_emptiness(const Pta& a, const std::set<std::string>& targets);

// Reachability for parameterless models; terminates via max-constant
// extrapolation of the zone graph after integer rescaling.
bool concrete_reach(const Pta& ta, const std::set<std::string>& targets);

struct IpCheckResult {
    Ternary verdict = Ternary::unknown;
    std::optional<SymbolicState> witness;  // integer-point-free state when verdict == no
};

IpCheckResult ip_check(const Pta& a, const ExploreLimits& limits, long search_bound);

// Conservative cycle detection on the extrapolated zone graph of a
// parameterless model: yes means some run has infinitely many discrete
// transitions; unknown otherwise.
enum class EcVerdict { yes, unknown };
EcVerdict ec_check(const Pta& ta);

}  // namespace paraverse::pta
