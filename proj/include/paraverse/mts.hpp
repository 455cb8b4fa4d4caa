#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace paraverse::mts {

// Explicit-set backend: at most 8 actions and 3 set variables, so a
// valuation packs into 8 bits per variable.
inline constexpr std::size_t max_actions = 8;
inline constexpr std::size_t max_vars = 3;

using ActionMask = std::uint32_t;
using PackedValuation = std::uint32_t;

struct Mts {
    std::vector<std::string> states;
    std::string initial;
    std::vector<std::string> actions;  // nonempty
    std::vector<std::string> vars;
    std::vector<std::string> props;
    std::map<std::string, std::set<std::string>> labels;

    struct Trans {
        std::size_t from, action, to;
    };
    std::vector<Trans> transitions;

    std::size_t state_index(const std::string& name) const;
    std::size_t action_index(const std::string& name) const;
    std::size_t var_index(const std::string& name) const;
    ActionMask out_mask(std::size_t state) const;  // actions with an outgoing edge
};

struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct unbound_variable_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Valuations
// ---------------------------------------------------------------------------

// v : vars -> nonempty action subsets, by name (API form).
struct ParamValuation {
    std::map<std::string, std::set<std::string>> assignment;
};

PackedValuation pack(const Mts& m, const ParamValuation& v);
ParamValuation unpack(const Mts& m, PackedValuation v);
inline ActionMask var_mask(PackedValuation v, std::size_t var) {
    return (v >> (8 * var)) & 0xffu;
}

// All valuations over (vars, actions): (2^|A|-1)^|X| packed values, sorted.
std::vector<PackedValuation> valuation_universe(const Mts& m);

// Sorted, deduplicated explicit set of packed valuations.
class ValuationSet {
  public:
    ValuationSet() = default;
    explicit ValuationSet(std::vector<PackedValuation> vals);

    static ValuationSet none() { return ValuationSet(); }
    static ValuationSet all(const Mts& m) { return ValuationSet(valuation_universe(m)); }

    bool contains(PackedValuation v) const;
    bool empty() const { return vals_.empty(); }
    std::size_t size() const { return vals_.size(); }
    const std::vector<PackedValuation>& values() const { return vals_; }

    ValuationSet unite(const ValuationSet& o) const;
    ValuationSet intersect(const ValuationSet& o) const;
    ValuationSet complement(const std::vector<PackedValuation>& universe) const;
    bool operator==(const ValuationSet& o) const { return vals_ == o.vals_; }
    bool subset_of(const ValuationSet& o) const;

    // Keeps valuations whose variable set contains the given action.
    ValuationSet filter_action_in_var(std::size_t var, std::size_t action) const;

  private:
    std::vector<PackedValuation> vals_;
};

using StateValFun = std::vector<ValuationSet>;  // indexed like Mts::states

// ---------------------------------------------------------------------------
// Formulas:  p | true | !f | f
//            E[a] X f | E[a] G f | Ew[a] G f | E[a](f U g)
// with a either a declared variable or a concrete nonempty action set.
// ---------------------------------------------------------------------------

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct ActionSpec {
    bool is_var = false;
    std::string var;           // when is_var
    std::set<std::string> acts;  // when !is_var, nonempty
};

struct Formula {
    enum class Kind { truth, prop, neg, disj, ex, eg, eg_inf, eu };
    Kind kind = Kind::truth;
    bool truth_value = true;    // truth
    std::string prop;           // prop
    FormulaPtr left, right;     // children (right only for eu)
    ActionSpec alpha;           // modal kinds

    static FormulaPtr mk_true(bool value = true);
    static FormulaPtr mk_prop(std::string name);
    static FormulaPtr mk_not(FormulaPtr f);
    static FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
    static FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);  // expands to !(!a | !b)
    static FormulaPtr mk_ex(ActionSpec a, FormulaPtr f);
    static FormulaPtr mk_eg(ActionSpec a, FormulaPtr f);
    static FormulaPtr mk_eg_inf(ActionSpec a, FormulaPtr f);
    static FormulaPtr mk_eu(ActionSpec a, FormulaPtr f, FormulaPtr g);
    static FormulaPtr mk_ef(ActionSpec a, FormulaPtr f);  // E[a](true U f)
};

std::string to_string(const Formula& f);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Exact evaluation of one valuation by boolean fixed points over the
// finite state space; maximal-path semantics (finite paths end deadlocked).
bool eval_fixed(const Mts& m, const ParamValuation& v, const FormulaPtr& phi,
                const std::string& state);

// Maximal paths over an action set, cycles folded into lassos, truncated at
// `bound` states. Brute-force oracle for eval_fixed on small models.
struct Path {
    std::vector<std::size_t> states;
    std::vector<std::size_t> actions;
    bool lasso = false;        // infinite: tail cycles back to states[lasso_start]
    std::size_t lasso_start = 0;
    bool truncated = false;    // hit the bound before becoming maximal
};
std::vector<Path> enumerate_paths(const Mts& m, const std::set<std::string>& b,
                                  const std::string& state, std::size_t bound);

// Per-variable one-step predecessor (default: per-action accumulation).
StateValFun par_pre(const Mts& m, const StateValFun& f, const std::string& y);
// Same function computed by scanning the whole valuation universe; the two
// strategies are equivalence-tested.
StateValFun par_pre_universe(const Mts& m, const StateValFun& f, const std::string& y);

// The valuation-set-valued semantics of phi at every state.
StateValFun synthesize(const Mts& m, const FormulaPtr& phi);

// Inclusion-minimal valuations (pointwise on variable sets), sorted.
std::vector<ParamValuation> minimal_valuations(const Mts& m, const ValuationSet& vs);

}  // namespace paraverse::mts
