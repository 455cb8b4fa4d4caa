#include "paraverse/pta.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <sstream>

namespace paraverse::pta {

VarContext Pta::full_context() const {
    VarContext ctx = clocks;
    ctx.insert(ctx.end(), params.begin(), params.end());
    return ctx;
}

std::set<std::string> Pta::clock_names() const {
    std::set<std::string> out;
    for (const auto& c : clocks) out.insert(c.name);
    return out;
}

const ConvexConstraint& Pta::invariant(const std::string& loc) const {
    auto it = invariants.find(loc);
    if (it == invariants.end()) throw std::runtime_error("unknown location '" + loc + "'");
    return it->second;
}

bool Pta::has_location(const std::string& loc) const {
    return std::find(locations.begin(), locations.end(), loc) != locations.end();
}

// ---------------------------------------------------------------------------
// Instantiation and concrete semantics
// ---------------------------------------------------------------------------

Pta instantiate(const Pta& a, const Valuation& v) {
    for (const auto& p : a.params) {
        if (!v.has(p.name)) throw invalid_parameter_error("no value for parameter '" + p.name + "'");
        if (v.at(p.name) < 0)
            throw invalid_parameter_error("negative value for parameter '" + p.name + "'");
    }
    auto strip = [&](const ConvexConstraint& c) {
        ConvexConstraint out = c;
        for (const auto& p : a.params) out = substitute(out, p.name, v.at(p.name));
        return out;
    };
    Pta out = a;
    out.params.clear();
    out.bounds.clear();
    for (auto& [loc, inv] : out.invariants) inv = strip(a.invariant(loc));
    for (std::size_t i = 0; i < out.edges.size(); ++i) out.edges[i].guard = strip(a.edges[i].guard);
    return out;
}

namespace {

Valuation zero_clocks(const Pta& ta) {
    Valuation v;
    for (const auto& c : ta.clocks) v.set(c.name, 0);
    return v;
}

Valuation delayed(const Valuation& v, const Rational& d) {
    Valuation out = v;
    for (auto& [name, q] : out.values) q += d;
    return out;
}

}  // namespace

Run replay(const Pta& ta, const std::vector<ScriptStep>& script) {
    if (!ta.params.empty()) throw std::runtime_error("replay requires an instantiated model");
    Run run;
    ConcreteState state{ta.initial, zero_clocks(ta)};
    if (!satisfies(ta.invariant(state.location), state.clock_val))
        throw step_rejected_error(0, "initial state violates invariant of " + state.location);
    run.states.push_back(state);
    for (std::size_t i = 0; i < script.size(); ++i) {
        const auto& [delay, edge_index] = script[i];
        if (delay < 0) throw step_rejected_error(i, "negative delay");
        if (edge_index >= ta.edges.size()) throw step_rejected_error(i, "no such edge");
        const Edge& e = ta.edges[edge_index];
        if (e.source != state.location)
            throw step_rejected_error(i, "edge leaves " + e.source + " but run is in " + state.location);
        Valuation after = delayed(state.clock_val, delay);
        // Invariants are convex, so holding at both ends of the delay means
        // holding throughout.
        if (!satisfies(ta.invariant(state.location), after))
            throw step_rejected_error(i, "invariant of " + state.location + " broken during delay");
        if (!satisfies(e.guard, after))
            throw step_rejected_error(i, "guard of edge " + std::to_string(edge_index) +
                                             " (" + e.action + ") not satisfied");
        Valuation next = after;
        for (const auto& x : e.resets) next.set(x, 0);
        if (!satisfies(ta.invariant(e.target), next))
            throw step_rejected_error(i, "invariant of " + e.target + " rejected entry");
        state = ConcreteState{e.target, std::move(next)};
        run.states.push_back(state);
        run.steps.push_back(script[i]);
        run.total_time += delay;
    }
    run.accepting = ta.accepting.count(state.location) != 0;
    return run;
}

WordsAndTrace words_and_trace(const Pta& a, const Run& r) {
    WordsAndTrace out;
    out.trace.push_back(r.states.front().location);
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        const Edge& e = a.edges[r.steps[i].edge];
        out.word.push_back(e.action);
        out.trace.push_back(e.action);
        out.trace.push_back(r.states[i + 1].location);
    }
    out.accepting = a.accepting.count(r.states.back().location) != 0;
    return out;
}

// ---------------------------------------------------------------------------
// Symbolic semantics
// ---------------------------------------------------------------------------

namespace {

// Non-negativity of timing parameters is part of the semantic domain and is
// carried inside every zone from the initial state on.
ConvexConstraint param_domain(const Pta& a) {
    ConvexConstraint c = ConvexConstraint::top(a.full_context());
    for (const auto& p : a.params) c.add(LinearTerm::of_var(p.name, -1), Rel::le);  // p >= 0
    return c;
}

ConvexConstraint clock_domain(const Pta& a) {
    ConvexConstraint c = ConvexConstraint::top(a.full_context());
    for (const auto& x : a.clocks) c.add(LinearTerm::of_var(x.name, -1), Rel::le);
    return c;
}

}  // namespace

SymbolicState initial_symbolic(const Pta& a) {
    VarContext ctx = a.full_context();
    ConvexConstraint zeros = ConvexConstraint::top(ctx);
    for (const auto& x : a.clocks) zeros.add(LinearTerm::of_var(x.name), Rel::eq);
    ConvexConstraint zone = time_elapse(zeros, a.clock_names());
    zone = conjoin(zone, a.invariant(a.initial));
    zone = conjoin(zone, param_domain(a));
    if (!is_satisfiable(zone))
        throw empty_initial_state_error("invariant of " + a.initial + " is empty at time zero");
    return SymbolicState{a.initial, std::move(zone)};
}

std::optional<SymbolicState> succ(const Pta& a, const SymbolicState& s, const Edge& e) {
    assert(e.source == s.location);
    ConvexConstraint z = conjoin(s.zone, e.guard);
    z = reset(z, e.resets);
    z = conjoin(z, a.invariant(e.target));
    z = time_elapse(z, a.clock_names());
    z = conjoin(z, a.invariant(e.target));
    if (!is_satisfiable(z)) return std::nullopt;
    return SymbolicState{e.target, std::move(z)};
}

bool zone_contains(const Pta& a, const ConvexConstraint& outer, const ConvexConstraint& inner) {
    ConvexConstraint dom = conjoin(param_domain(a), clock_domain(a));
    return convex_contained(conjoin(inner, dom), {conjoin(outer, dom)});
}

bool zone_equal(const Pta& a, const ConvexConstraint& x, const ConvexConstraint& y) {
    return zone_contains(a, x, y) && zone_contains(a, y, x);
}

Pzg explore_pzg(const Pta& a, const ExploreLimits& limits, bool subsumption) {
    Pzg g;
    std::map<std::string, std::vector<std::size_t>> by_location;
    std::deque<std::pair<std::size_t, std::size_t>> frontier;  // state index, depth

    auto find_home = [&](const SymbolicState& s) -> std::optional<std::size_t> {
        for (std::size_t i : by_location[s.location]) {
            const auto& stored = g.states[i].zone;
            if (subsumption ? zone_contains(a, stored, s.zone) : zone_equal(a, stored, s.zone))
                return i;
        }
        return std::nullopt;
    };

    SymbolicState init = initial_symbolic(a);
    g.states.push_back(init);
    by_location[init.location].push_back(0);
    frontier.emplace_back(0, 0);

    while (!frontier.empty()) {
        auto [index, depth] = frontier.front();
        frontier.pop_front();
        if (depth >= limits.max_depth) {
            g.depth_bounded = true;
            continue;
        }
        for (std::size_t ei = 0; ei < a.edges.size(); ++ei) {
            const Edge& e = a.edges[ei];
            if (e.source != g.states[index].location) continue;
            auto next = succ(a, g.states[index], e);
            if (!next) continue;
            if (auto home = find_home(*next)) {
                if (!subsumption) g.transitions.push_back({index, ei, *home});
                continue;
            }
            if (g.states.size() >= limits.max_states) {
                g.state_bounded = true;
                continue;
            }
            std::size_t fresh = g.states.size();
            g.states.push_back(std::move(*next));
            by_location[g.states[fresh].location].push_back(fresh);
            g.transitions.push_back({index, ei, fresh});
            frontier.emplace_back(fresh, depth + 1);
        }
    }
    g.complete = !g.depth_bounded && !g.state_bounded;
    return g;
}

SynthesisResult ef_synthesis(const Pta& a, const std::set<std::string>& targets,
                             const ExploreLimits& limits) {
    Pzg g = explore_pzg(a, limits, /*subsumption=*/true);
    ConstraintSet acc = ConstraintSet::empty(a.params);
    for (const auto& s : g.states)
        if (targets.count(s.location)) acc.add_disjunct(eliminate(s.zone, a.clock_names()));
    return SynthesisResult{simplify(acc), g.complete};
}

// ---------------------------------------------------------------------------
// L/U classification
// ---------------------------------------------------------------------------

LuClassification classify_lu(const Pta& a) {
    // In the normal form (single clock with coefficient ±1) + Σβ·p + d <= 0,
    // a positive β tightens the constraint as p grows (p acts as a lower
    // bound on the clock) and a negative β relaxes it (upper bound).
    // Equalities were expanded into both atoms, so they register both ways.
    std::map<std::string, std::pair<bool, bool>> occ;  // name -> (lower, upper)
    auto scan = [&](const ConvexConstraint& c) {
        for (const auto& atom : c.atoms) {
            for (const auto& p : a.params) {
                Integer beta = atom.term.coeff_of(p.name);
                if (beta > 0) occ[p.name].first = true;
                else if (beta < 0) occ[p.name].second = true;
            }
        }
    };
    for (const auto& [loc, inv] : a.invariants) scan(inv);
    for (const auto& e : a.edges) scan(e.guard);

    LuClassification out;
    out.is_lu = true;
    for (const auto& p : a.params) {
        auto [low, up] = occ[p.name];
        if (low && up) {
            out.is_lu = false;
            out.lower.clear();
            out.upper.clear();
            return out;
        }
        // Unconstrained parameters are compatible with either side; they go
        // to the lower set for determinism.
        if (up) out.upper.insert(p.name);
        else out.lower.insert(p.name);
    }
    return out;
}

bool lu_ef_emptiness(const Pta& a, const std::set<std::string>& targets) {
    LuClassification lu = classify_lu(a);
    if (!lu.is_lu) throw not_lu_error("model is not lower/upper-bound partitioned");

    // Lower-bound parameters are most permissive at 0. Upper-bound ones are
    // most permissive in the limit: by the polarity rule every remaining
    // atom that mentions one only relaxes as that parameter grows, so the
    // atom is dropped outright instead of picking a "sufficiently large"
    // stand-in constant.
    auto mentions_upper = [&](const AtomicConstraint& atom) {
        for (const auto& p : lu.upper)
            if (atom.term.coeff_of(p) != 0) return true;
        return false;
    };
    auto relax = [&](const ConvexConstraint& c) {
        ConvexConstraint out = c;
        for (const auto& p : lu.lower) out = substitute(out, p, 0);
        std::vector<AtomicConstraint> kept;
        for (const auto& atom : out.atoms)
            if (!mentions_upper(atom)) kept.push_back(atom);
        out.atoms = std::move(kept);
        out.context = a.clocks;
        return out;
    };

    Pta relaxed = a;
    relaxed.params.clear();
    relaxed.bounds.clear();
    for (auto& [loc, inv] : relaxed.invariants) inv = relax(a.invariant(loc));
    for (std::size_t i = 0; i < relaxed.edges.size(); ++i)
        relaxed.edges[i].guard = relax(a.edges[i].guard);
    return !concrete_reach(relaxed, targets);
}

// ---------------------------------------------------------------------------
// Parameterless reachability with extrapolation
// ---------------------------------------------------------------------------

namespace {

// Rescales all guard/invariant constants of a parameterless model to
// integers (multiplying by the lcm of denominators leaves reachability of
// locations unchanged) and returns the rescaled model plus the maximal
// absolute constant.
std::pair<Pta, Integer> rescale_to_integers(const Pta& ta) {
    Integer l = 1;
    auto visit = [&](const ConvexConstraint& c) {
        for (const auto& atom : c.atoms)
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), atom.term.constant.get_den().get_mpz_t());
    };
    for (const auto& [loc, inv] : ta.invariants) visit(inv);
    for (const auto& e : ta.edges) visit(e.guard);

    Pta out = ta;
    Integer max_const = 0;
    auto scale = [&](ConvexConstraint& c) {
        for (auto& atom : c.atoms) {
            atom.term.constant *= Rational(l);
            Integer mag = abs(atom.term.constant.get_num());
            if (mag > max_const) max_const = mag;
        }
    };
    for (auto& [loc, inv] : out.invariants) scale(inv);
    for (auto& e : out.edges) scale(e.guard);
    return {std::move(out), max_const};
}

struct DbmEntry {
    bool finite = false;
    Rational bound;
    bool strict = false;
};

// Tight difference bounds of a clock zone, including the implicit zero
// clock at index 0. Identical for point-set-equal zones.
std::vector<std::vector<DbmEntry>> tight_dbm(const ConvexConstraint& zone, const VarContext& clocks) {
    std::size_t n = clocks.size() + 1;
    std::vector<std::vector<DbmEntry>> m(n, std::vector<DbmEntry>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            LinearTerm t;
            if (i > 0) t.add_var(clocks[i - 1].name, 1);
            if (j > 0) t.add_var(clocks[j - 1].name, -1);
            TermBound b = upper_bound(zone, t);
            if (b.value) m[i][j] = DbmEntry{true, *b.value, b.strict};
        }
    }
    return m;
}

// Classic max-constant widening: bounds above M vanish, bounds below -M are
// clamped. Preserves location reachability and makes the graph finite.
void extrapolate(std::vector<std::vector<DbmEntry>>& m, const Integer& max_const) {
    Rational big(max_const);
    for (auto& row : m) {
        for (auto& e : row) {
            if (!e.finite) continue;
            if (e.bound > big) e = DbmEntry{};
            else if (e.bound < -big) e = DbmEntry{true, -big, true};
        }
    }
}

ConvexConstraint zone_of_dbm(const std::vector<std::vector<DbmEntry>>& m, const VarContext& clocks) {
    ConvexConstraint z = ConvexConstraint::top(clocks);
    std::size_t n = clocks.size() + 1;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !m[i][j].finite) continue;
            LinearTerm t;
            if (i > 0) t.add_var(clocks[i - 1].name, 1);
            if (j > 0) t.add_var(clocks[j - 1].name, -1);
            t.constant = -m[i][j].bound;
            z.atoms.push_back(AtomicConstraint{std::move(t), m[i][j].strict});
        }
    }
    return z;
}

std::string dbm_key(const std::string& loc, const std::vector<std::vector<DbmEntry>>& m) {
    std::ostringstream oss;
    oss << loc << '|';
    for (const auto& row : m) {
        for (const auto& e : row) {
            if (!e.finite) oss << "inf,";
            else oss << rat_to_string(e.bound) << (e.strict ? "!" : "") << ',';
        }
    }
    return oss.str();
}

struct NormalizedGraph {
    struct Node {
        std::string location;
        ConvexConstraint zone;
        std::size_t parent = SIZE_MAX;
    };
    std::vector<Node> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    bool ancestor_domination = false;  // some node's zone contains an ancestor's, same location
};

NormalizedGraph normalized_zone_graph(const Pta& ta) {
    if (!ta.params.empty()) throw std::runtime_error("model still has parameters");
    auto [model, max_const] = rescale_to_integers(ta);

    NormalizedGraph g;
    std::map<std::string, std::size_t> seen;
    std::deque<std::size_t> frontier;

    auto push = [&](const std::string& loc, const ConvexConstraint& zone, std::size_t parent,
                    bool& existed) -> std::size_t {
        auto m = tight_dbm(zone, model.clocks);
        extrapolate(m, max_const);
        std::string key = dbm_key(loc, m);
        auto it = seen.find(key);
        if (it != seen.end()) {
            existed = true;
            return it->second;
        }
        existed = false;
        std::size_t id = g.nodes.size();
        g.nodes.push_back({loc, zone_of_dbm(m, model.clocks), parent});
        seen.emplace(std::move(key), id);
        frontier.push_back(id);
        return id;
    };

    SymbolicState init = initial_symbolic(model);
    bool existed = false;
    push(init.location, init.zone, SIZE_MAX, existed);

    while (!frontier.empty()) {
        std::size_t index = frontier.front();
        frontier.pop_front();
        for (const Edge& e : model.edges) {
            if (e.source != g.nodes[index].location) continue;
            SymbolicState cur{g.nodes[index].location, g.nodes[index].zone};
            auto next = succ(model, cur, e);
            if (!next) continue;
            std::size_t target = push(next->location, next->zone, index, existed);
            g.arcs.emplace_back(index, target);
            if (!existed) {
                for (std::size_t anc = g.nodes[target].parent; anc != SIZE_MAX;
                     anc = g.nodes[anc].parent) {
                    if (g.nodes[anc].location == g.nodes[target].location &&
                        convex_contained(g.nodes[anc].zone, {g.nodes[target].zone}))
                        g.ancestor_domination = true;
                }
            }
        }
    }
    return g;
}

}  // namespace

bool concrete_reach(const Pta& ta, const std::set<std::string>& targets) {
    NormalizedGraph g = normalized_zone_graph(ta);
    for (const auto& n : g.nodes)
        if (targets.count(n.location)) return true;
    return false;
}

EcVerdict ec_check(const Pta& ta) {
    NormalizedGraph g = normalized_zone_graph(ta);
    if (g.ancestor_domination) return EcVerdict::yes;
    std::vector<std::vector<std::size_t>> adj(g.nodes.size());
    for (const auto& [s, t] : g.arcs) adj[s].push_back(t);
    std::vector<int> state(g.nodes.size(), 0);  // 0 fresh, 1 on stack, 2 done
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t root = 0; root < g.nodes.size(); ++root) {
        if (state[root]) continue;
        stack.emplace_back(root, 0);
        state[root] = 1;
        while (!stack.empty()) {
            auto& [node, next_child] = stack.back();
            if (next_child < adj[node].size()) {
                std::size_t child = adj[node][next_child++];
                if (state[child] == 1) return EcVerdict::yes;
                if (state[child] == 0) {
                    state[child] = 1;
                    stack.emplace_back(child, 0);
                }
            } else {
                state[node] = 2;
                stack.pop_back();
            }
        }
    }
    return EcVerdict::unknown;
}

IpCheckResult ip_check(const Pta& a, const ExploreLimits& limits, long search_bound) {
    IpCheckResult res;
    Pzg g = explore_pzg(a, limits, /*subsumption=*/false);
    bool saw_unknown = false;
    for (const auto& s : g.states) {
        auto ip = has_integer_point(s.zone, search_bound);
        if (ip.verdict == Ternary::no) {
            res.verdict = Ternary::no;
            res.witness = s;
            return res;
        }
        if (ip.verdict == Ternary::unknown) saw_unknown = true;
    }
    res.verdict = (g.complete && !saw_unknown) ? Ternary::yes : Ternary::unknown;
    return res;
}

}  // namespace paraverse::pta
