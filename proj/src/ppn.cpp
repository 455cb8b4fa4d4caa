#include "paraverse/ppn.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

namespace paraverse::ppn {

std::size_t Ppn::place_index(const std::string& name) const {
    auto it = std::find(places.begin(), places.end(), name);
    if (it == places.end()) throw std::runtime_error("unknown place '" + name + "'");
    return static_cast<std::size_t>(it - places.begin());
}

const Weight* Ppn::pre_weight(const std::string& p, const std::string& t) const {
    auto it = pre.find({p, t});
    return it == pre.end() ? nullptr : &it->second;
}

const Weight* Ppn::post_weight(const std::string& p, const std::string& t) const {
    auto it = post.find({p, t});
    return it == post.end() ? nullptr : &it->second;
}

bool Ppn::is_plain() const {
    return classify(*this).is_plain;
}

Marking to_marking(const Ppn& n, const std::map<std::string, std::uint64_t>& entries) {
    Marking m(n.places.size(), 0);
    for (const auto& [name, count] : entries) m[n.place_index(name)] = count;
    return m;
}

// ---------------------------------------------------------------------------
// Instantiation, firing, classification
// ---------------------------------------------------------------------------

Ppn instantiate(const Ppn& n, const std::map<std::string, std::uint64_t>& v) {
    for (const auto& p : n.params)
        if (!v.count(p)) throw invalid_net_valuation_error("no value for parameter '" + p + "'");
    auto fix = [&](const Weight& w) { return w.is_param ? Weight::of(v.at(w.param)) : w; };
    Ppn out = n;
    out.params.clear();
    for (auto& [k, w] : out.pre) w = fix(w);
    for (auto& [k, w] : out.post) w = fix(w);
    for (auto& [k, w] : out.initial) w = fix(w);
    return out;
}

Marking initial_marking(const Ppn& plain) {
    Marking m(plain.places.size(), 0);
    for (const auto& [place, w] : plain.initial) {
        if (w.is_param) throw invalid_net_valuation_error("net still has parameters");
        m[plain.place_index(place)] = w.n;
    }
    return m;
}

namespace {

std::uint64_t numeric(const Weight* w) {
    if (!w) return 0;
    if (w->is_param) throw invalid_net_valuation_error("net still has parameters");
    return w->n;
}

}  // namespace

std::optional<Marking> fire(const Ppn& plain, const Marking& m, const std::string& t) {
    Marking out = m;
    for (std::size_t i = 0; i < plain.places.size(); ++i) {
        std::uint64_t need = numeric(plain.pre_weight(plain.places[i], t));
        if (m[i] < need) return std::nullopt;
        out[i] = m[i] - need;
    }
    for (std::size_t i = 0; i < plain.places.size(); ++i)
        out[i] += numeric(plain.post_weight(plain.places[i], t));
    return out;
}

Subclass classify(const Ppn& n) {
    std::set<std::string> pre_params, post_params, init_params;
    for (const auto& [k, w] : n.pre)
        if (w.is_param) pre_params.insert(w.param);
    for (const auto& [k, w] : n.post)
        if (w.is_param) post_params.insert(w.param);
    for (const auto& [k, w] : n.initial)
        if (w.is_param) init_params.insert(w.param);

    Subclass out;
    out.is_plain = pre_params.empty() && post_params.empty() && init_params.empty();
    out.is_pre_t = post_params.empty() && init_params.empty();
    out.is_post_t = pre_params.empty() && init_params.empty();
    out.is_p = pre_params.empty() && post_params.empty();
    std::vector<std::string> common;
    std::set_intersection(pre_params.begin(), pre_params.end(), post_params.begin(),
                          post_params.end(), std::back_inserter(common));
    out.is_distinct_t = common.empty() && init_params.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Karp-Miller
// ---------------------------------------------------------------------------

namespace {

struct OmegaWeights {
    // Numeric inputs, possibly-omega outputs and initial entries.
    std::vector<std::vector<std::uint64_t>> pre;   // [transition][place]
    std::vector<std::vector<OmegaNat>> post;
    OmegaMarking initial;
};

OmegaWeights lift(const Ppn& n, bool omega_parametric) {
    OmegaWeights w;
    w.pre.assign(n.transitions.size(), std::vector<std::uint64_t>(n.places.size(), 0));
    w.post.assign(n.transitions.size(), std::vector<OmegaNat>(n.places.size(), OmegaNat::of(0)));
    w.initial.assign(n.places.size(), OmegaNat::of(0));
    for (std::size_t t = 0; t < n.transitions.size(); ++t) {
        for (std::size_t p = 0; p < n.places.size(); ++p) {
            const Weight* wp = n.pre_weight(n.places[p], n.transitions[t]);
            if (wp) {
                if (wp->is_param)
                    throw invalid_net_valuation_error("parametric input arcs are never omega-lifted");
                w.pre[t][p] = wp->n;
            }
            const Weight* wq = n.post_weight(n.places[p], n.transitions[t]);
            if (wq) {
                if (wq->is_param) {
                    if (!omega_parametric)
                        throw invalid_net_valuation_error("net still has parameters");
                    w.post[t][p] = OmegaNat::top();
                } else {
                    w.post[t][p] = OmegaNat::of(wq->n);
                }
            }
        }
    }
    for (const auto& [place, wi] : n.initial) {
        std::size_t p = n.place_index(place);
        if (wi.is_param) {
            if (!omega_parametric)
                throw invalid_net_valuation_error("net still has parameters");
            w.initial[p] = OmegaNat::top();
        } else {
            w.initial[p] = OmegaNat::of(wi.n);
        }
    }
    return w;
}

bool omega_geq(const OmegaMarking& a, const OmegaMarking& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] >= b[i])) return false;
    return true;
}

std::optional<OmegaMarking> fire_omega(const OmegaWeights& w, const OmegaMarking& m,
                                       std::size_t t) {
    OmegaMarking out = m;
    for (std::size_t p = 0; p < m.size(); ++p) {
        if (m[p].omega) continue;
        if (m[p].n < w.pre[t][p]) return std::nullopt;
        out[p].n = m[p].n - w.pre[t][p];
    }
    for (std::size_t p = 0; p < m.size(); ++p) {
        if (out[p].omega) continue;
        if (w.post[t][p].omega) out[p] = OmegaNat::top();
        else out[p].n += w.post[t][p].n;
    }
    return out;
}

}  // namespace

KmTree km_analyze(const Ppn& n, bool omega_parametric) {
    OmegaWeights w = lift(n, omega_parametric);
    KmTree tree;
    tree.nodes.push_back(KmNode{w.initial, SIZE_MAX, SIZE_MAX});
    std::deque<std::size_t> frontier{0};

    auto ancestors_of = [&](std::size_t node) {
        std::vector<std::size_t> out;
        for (std::size_t a = node; a != SIZE_MAX; a = tree.nodes[a].parent) out.push_back(a);
        return out;
    };

    while (!frontier.empty()) {
        std::size_t index = frontier.front();
        frontier.pop_front();
        const OmegaMarking here = tree.nodes[index].marking;
        // A marking equal to one of its proper ancestors spawns nothing new.
        bool repeats = false;
        for (std::size_t a = tree.nodes[index].parent; a != SIZE_MAX; a = tree.nodes[a].parent)
            if (tree.nodes[a].marking == here) repeats = true;
        if (repeats) continue;

        for (std::size_t t = 0; t < n.transitions.size(); ++t) {
            auto next = fire_omega(w, here, t);
            if (!next) continue;
            // Accelerate: any dominated ancestor pumps the strictly grown
            // places to omega; repeat until stable.
            bool grew = true;
            while (grew) {
                grew = false;
                for (std::size_t a : ancestors_of(index)) {
                    const OmegaMarking& anc = tree.nodes[a].marking;
                    if (!omega_geq(*next, anc) || *next == anc) continue;
                    for (std::size_t p = 0; p < next->size(); ++p) {
                        if ((*next)[p].omega) continue;
                        if (!anc[p].omega && (*next)[p].n > anc[p].n) {
                            (*next)[p] = OmegaNat::top();
                            grew = true;
                        }
                    }
                }
            }
            std::size_t fresh = tree.nodes.size();
            tree.nodes.push_back(KmNode{std::move(*next), index, t});
            frontier.push_back(fresh);
        }
    }

    for (const auto& node : tree.nodes) {
        bool dominated = false;
        for (const auto& other : tree.nodes)
            if (&other != &node && omega_geq(other.marking, node.marking) &&
                !(other.marking == node.marking))
                dominated = true;
        if (!dominated) {
            bool dup = false;
            for (const auto& kept : tree.cover_set) dup |= kept == node.marking;
            if (!dup) tree.cover_set.push_back(node.marking);
        }
    }

    tree.bounded = true;
    std::vector<std::set<std::string>> omega_sets;
    for (const auto& node : tree.nodes) {
        std::set<std::string> s;
        for (std::size_t p = 0; p < node.marking.size(); ++p)
            if (node.marking[p].omega) s.insert(n.places[p]);
        if (!s.empty()) {
            tree.bounded = false;
            omega_sets.push_back(std::move(s));
        }
    }
    // Keep only inclusion-maximal omega sets, deduplicated, sorted.
    std::sort(omega_sets.begin(), omega_sets.end());
    omega_sets.erase(std::unique(omega_sets.begin(), omega_sets.end()), omega_sets.end());
    for (const auto& s : omega_sets) {
        bool dominated = false;
        for (const auto& bigger : omega_sets)
            if (&bigger != &s && std::includes(bigger.begin(), bigger.end(), s.begin(), s.end()) &&
                bigger != s)
                dominated = true;
        if (!dominated) tree.unbounded_place_sets.push_back(s);
    }
    return tree;
}

bool coverable(const Ppn& plain, const Marking& m) {
    KmTree tree = km_analyze(plain, false);
    OmegaMarking target;
    for (auto v : m) target.push_back(OmegaNat::of(v));
    for (const auto& top : tree.cover_set)
        if (omega_geq(top, target)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Coverability dispatch
// ---------------------------------------------------------------------------

namespace {

bool omega_cover(const Ppn& n, const Marking& target) {
    KmTree tree = km_analyze(n, true);
    OmegaMarking t;
    for (auto v : target) t.push_back(OmegaNat::of(v));
    for (const auto& top : tree.cover_set)
        if (omega_geq(top, t)) return true;
    return false;
}

// Concrete breadth-first search for a covering run on a plain net. Budget 0
// means unbounded (used only after coverability was already decided).
std::optional<std::vector<std::string>> cover_run(const Ppn& plain, const Marking& target,
                                                  std::size_t budget) {
    struct Item {
        Marking m;
        std::size_t parent;
        std::size_t via;
    };
    std::vector<Item> arena;
    std::set<Marking> seen;
    std::deque<std::size_t> frontier;
    Marking m0 = initial_marking(plain);
    arena.push_back({m0, SIZE_MAX, SIZE_MAX});
    seen.insert(m0);
    frontier.push_back(0);
    auto covers = [&](const Marking& m) {
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i] < target[i]) return false;
        return true;
    };
    while (!frontier.empty()) {
        std::size_t index = frontier.front();
        frontier.pop_front();
        if (covers(arena[index].m)) {
            std::vector<std::string> run;
            for (std::size_t i = index; arena[i].parent != SIZE_MAX; i = arena[i].parent)
                run.push_back(plain.transitions[arena[i].via]);
            std::reverse(run.begin(), run.end());
            return run;
        }
        if (budget && arena.size() > budget) return std::nullopt;
        for (std::size_t t = 0; t < plain.transitions.size(); ++t) {
            auto next = fire(plain, arena[index].m, plain.transitions[t]);
            if (!next || seen.count(*next)) continue;
            seen.insert(*next);
            arena.push_back({std::move(*next), index, t});
            frontier.push_back(arena.size() - 1);
        }
    }
    return std::nullopt;
}

std::map<std::string, std::uint64_t> uniform_valuation(const Ppn& n, std::uint64_t k) {
    std::map<std::string, std::uint64_t> v;
    for (const auto& p : n.params) v[p] = k;
    return v;
}

// Enumerates all valuations with entries in [0, bound], lexicographically.
bool next_valuation(const Ppn& n, std::map<std::string, std::uint64_t>& v, std::uint64_t bound) {
    for (const auto& p : n.params) {
        if (v[p] < bound) {
            ++v[p];
            return true;
        }
        v[p] = 0;
    }
    return false;
}

}  // namespace

CoverResult existential_coverable(const Ppn& n, const std::map<std::string, std::uint64_t>& target,
                                  const EnumLimits& limits) {
    Marking m = to_marking(n, target);
    Subclass cls = classify(n);
    CoverResult res;

    if (cls.is_pre_t) {
        // Shrinking input weights only adds behaviour, so the all-zero
        // valuation is the most permissive instance and decides exactly.
        Ppn zero = instantiate(n, uniform_valuation(n, 0));
        if (!coverable(zero, m)) {
            res.verdict = Verdict::no;
            return res;
        }
        auto run = cover_run(zero, m, 0);
        assert(run);
        res.verdict = Verdict::yes;
        res.witness = CoverWitness{uniform_valuation(n, 0), std::move(*run)};
        return res;
    }

    bool pre_numeric = true;
    for (const auto& [k, w] : n.pre)
        if (w.is_param) pre_numeric = false;
    if (pre_numeric) {
        // Parameters sit on output arcs or in the initial marking only:
        // treat them as unbounded supplies and decide on the omega net.
        if (!omega_cover(n, m)) {
            res.verdict = Verdict::no;
            return res;
        }
        // Concretize: growing the parameters only adds behaviour, so some
        // uniform valuation works; widen the budget alongside the value.
        std::size_t budget = std::max<std::size_t>(limits.search_states, 1000);
        for (std::uint64_t k = 0;; ++k, budget *= 2) {
            Ppn inst = instantiate(n, uniform_valuation(n, k));
            if (auto run = cover_run(inst, m, budget)) {
                res.verdict = Verdict::yes;
                res.witness = CoverWitness{uniform_valuation(n, k), std::move(*run)};
                return res;
            }
        }
    }

    // General nets: bounded enumeration, yes on a witness, unknown otherwise.
    std::map<std::string, std::uint64_t> v = uniform_valuation(n, 0);
    do {
        Ppn inst = instantiate(n, v);
        if (coverable(inst, m)) {
            auto run = cover_run(inst, m, 0);
            assert(run);
            res.verdict = Verdict::yes;
            res.witness = CoverWitness{v, std::move(*run)};
            return res;
        }
    } while (next_valuation(n, v, limits.valuation_bound));
    res.verdict = Verdict::unknown;
    return res;
}

CoverResult universal_coverable(const Ppn& n, const std::map<std::string, std::uint64_t>& target,
                                const EnumLimits& limits) {
    Marking m = to_marking(n, target);
    Subclass cls = classify(n);
    CoverResult res;

    if (cls.is_post_t) {
        // Growing output weights only adds behaviour, so the all-zero
        // valuation is the least permissive instance and decides exactly.
        Ppn zero = instantiate(n, uniform_valuation(n, 0));
        if (coverable(zero, m)) {
            res.verdict = Verdict::yes;
            return res;
        }
        res.verdict = Verdict::no;
        res.witness = CoverWitness{uniform_valuation(n, 0), {}};
        return res;
    }

    // Sample valuations for a counterexample.
    std::map<std::string, std::uint64_t> v = uniform_valuation(n, 0);
    do {
        Ppn inst = instantiate(n, v);
        if (!coverable(inst, m)) {
            res.verdict = Verdict::no;
            res.witness = CoverWitness{v, {}};
            return res;
        }
    } while (next_valuation(n, v, limits.valuation_bound));
    res.verdict = Verdict::unknown;
    return res;
}

// ---------------------------------------------------------------------------
// Exact reachability
// ---------------------------------------------------------------------------

ReachResult bounded_reach(const Ppn& plain, const Marking& target, const ReachLimits& limits) {
    struct Item {
        Marking m;
        std::size_t parent;
        std::size_t via;
    };
    std::vector<Item> arena;
    std::set<Marking> seen;
    std::deque<std::size_t> frontier;
    Marking m0 = initial_marking(plain);
    arena.push_back({m0, SIZE_MAX, SIZE_MAX});
    seen.insert(m0);
    frontier.push_back(0);
    bool truncated = false;

    ReachResult res;
    while (!frontier.empty()) {
        std::size_t index = frontier.front();
        frontier.pop_front();
        if (arena[index].m == target) {
            for (std::size_t i = index; arena[i].parent != SIZE_MAX; i = arena[i].parent)
                res.firing_sequence.push_back(plain.transitions[arena[i].via]);
            std::reverse(res.firing_sequence.begin(), res.firing_sequence.end());
            res.verdict = ReachVerdict::yes;
            return res;
        }
        for (std::size_t t = 0; t < plain.transitions.size(); ++t) {
            auto next = fire(plain, arena[index].m, plain.transitions[t]);
            if (!next || seen.count(*next)) continue;
            bool over = false;
            for (auto v : *next)
                if (v > limits.token_cap) over = true;
            if (over || arena.size() >= limits.max_states) {
                truncated = true;
                continue;
            }
            seen.insert(*next);
            arena.push_back({std::move(*next), index, t});
            frontier.push_back(arena.size() - 1);
        }
    }
    if (!truncated && km_analyze(plain, false).bounded) {
        res.verdict = ReachVerdict::no_within_bound;
    } else {
        res.verdict = ReachVerdict::unknown;
    }
    return res;
}

}  // namespace paraverse::ppn
