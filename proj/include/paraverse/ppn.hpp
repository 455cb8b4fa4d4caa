#pragma once

#include "paraverse/linear.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace paraverse::ppn {

// Arc weight / initial-marking entry: a natural number or a parameter name.
struct Weight {
    bool is_param = false;
    std::uint64_t n = 0;
    std::string param;

    static Weight of(std::uint64_t v) { return Weight{false, v, {}}; }
    static Weight of_param(std::string p) { return Weight{true, 0, std::move(p)}; }

    bool operator==(const Weight& o) const {
        return is_param == o.is_param && n == o.n && param == o.param;
    }
};

struct Ppn {
    std::vector<std::string> places;
    std::vector<std::string> transitions;
    std::vector<std::string> params;
    std::map<std::pair<std::string, std::string>, Weight> pre;   // (place, transition)
    std::map<std::pair<std::string, std::string>, Weight> post;  // absent entries are 0
    std::map<std::string, Weight> initial;

    std::size_t place_index(const std::string& name) const;
    const Weight* pre_weight(const std::string& p, const std::string& t) const;
    const Weight* post_weight(const std::string& p, const std::string& t) const;
    bool is_plain() const;
};

using Marking = std::vector<std::uint64_t>;  // indexed like Ppn::places

// Natural number extended with an absorbing top element.
struct OmegaNat {
    bool omega = false;
    std::uint64_t n = 0;

    static OmegaNat of(std::uint64_t v) { return OmegaNat{false, v}; }
    static OmegaNat top() { return OmegaNat{true, 0}; }

    bool operator==(const OmegaNat& o) const {
        return omega == o.omega && (omega || n == o.n);
    }
    bool operator>=(const OmegaNat& o) const {
        if (omega) return true;
        if (o.omega) return false;
        return n >= o.n;
    }
};

using OmegaMarking = std::vector<OmegaNat>;

struct Subclass {
    bool is_pre_t = false;      // parameters only on input arcs
    bool is_post_t = false;     // parameters only on output arcs
    bool is_distinct_t = false; // input and output parameter sets disjoint
    bool is_p = false;          // parameters only in the initial marking
    bool is_plain = false;      // no parameters anywhere
};

struct KmNode {
    OmegaMarking marking;
    std::size_t parent = SIZE_MAX;
    std::size_t via_transition = SIZE_MAX;
};

struct KmTree {
    std::vector<KmNode> nodes;
    std::vector<OmegaMarking> cover_set;  // domination-maximal markings
    bool bounded = false;
    std::vector<std::set<std::string>> unbounded_place_sets;  // maximal omega place sets
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

struct invalid_net_valuation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Replaces every parametric weight and initial entry; v must be total
// with natural values.
Ppn instantiate(const Ppn& n, const std::map<std::string, std::uint64_t>& v);

Marking initial_marking(const Ppn& plain);
std::optional<Marking> fire(const Ppn& plain, const Marking& m, const std::string& t);

Subclass classify(const Ppn& n);

// Karp-Miller on a plain net, or on the omega-lifted net when
// `omega_parametric` asks for parametric outputs/initial entries to be
// treated as unbounded supplies (inputs are never omega-treated).
KmTree km_analyze(const Ppn& n, bool omega_parametric = false);

// Some Karp-Miller node dominates m.
bool coverable(const Ppn& plain, const Marking& m);

// Existential / universal coverability with subclass dispatch; `unknown`
// only on the fall-back enumeration paths.
enum class Verdict { yes, no, unknown };

struct CoverWitness {
    std::map<std::string, std::uint64_t> valuation;
    std::vector<std::string> firing_sequence;  // replayable via fire()
};

struct CoverResult {
    Verdict verdict = Verdict::unknown;
    std::optional<CoverWitness> witness;  // for existential yes / universal no
};

struct EnumLimits {
    std::uint64_t valuation_bound = 5;
    std::size_t search_states = 20000;
};

CoverResult existential_coverable(const Ppn& n, const std::map<std::string, std::uint64_t>& target,
                                  const EnumLimits& limits = {});
CoverResult universal_coverable(const Ppn& n, const std::map<std::string, std::uint64_t>& target,
                                const EnumLimits& limits = {});

// Exact-marking reachability by bounded breadth-first search.
enum class ReachVerdict { yes, no_within_bound, unknown };

struct ReachLimits {
    std::uint64_t token_cap = 200;
    std::size_t max_states = 100000;
};

struct ReachResult {
    ReachVerdict verdict = ReachVerdict::unknown;
    std::vector<std::string> firing_sequence;  // on yes
};

ReachResult bounded_reach(const Ppn& plain, const Marking& target, const ReachLimits& limits);

Marking to_marking(const Ppn& n, const std::map<std::string, std::uint64_t>& entries);

}  // namespace paraverse::ppn
