#include "paraverse/mts.hpp"

#include <algorithm>
#include <cassert>

namespace paraverse::mts {

std::size_t Mts::state_index(const std::string& name) const {
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end()) throw std::runtime_error("unknown state '" + name + "'");
    return static_cast<std::size_t>(it - states.begin());
}

std::size_t Mts::action_index(const std::string& name) const {
    auto it = std::find(actions.begin(), actions.end(), name);
    if (it == actions.end()) throw std::runtime_error("unknown action '" + name + "'");
    return static_cast<std::size_t>(it - actions.begin());
}

std::size_t Mts::var_index(const std::string& name) const {
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) throw unbound_variable_error("unbound variable '" + name + "'");
    return static_cast<std::size_t>(it - vars.begin());
}

ActionMask Mts::out_mask(std::size_t state) const {
    ActionMask m = 0;
    for (const auto& t : transitions)
        if (t.from == state) m |= ActionMask(1) << t.action;
    return m;
}

// ---------------------------------------------------------------------------
// Valuations
// ---------------------------------------------------------------------------

PackedValuation pack(const Mts& m, const ParamValuation& v) {
    PackedValuation out = 0;
    for (std::size_t i = 0; i < m.vars.size(); ++i) {
        auto it = v.assignment.find(m.vars[i]);
        if (it == v.assignment.end() || it->second.empty())
            throw unbound_variable_error("valuation misses variable '" + m.vars[i] + "'");
        ActionMask mask = 0;
        for (const auto& a : it->second) mask |= ActionMask(1) << m.action_index(a);
        out |= mask << (8 * i);
    }
    return out;
}

ParamValuation unpack(const Mts& m, PackedValuation v) {
    ParamValuation out;
    for (std::size_t i = 0; i < m.vars.size(); ++i) {
        std::set<std::string> acts;
        ActionMask mask = var_mask(v, i);
        for (std::size_t a = 0; a < m.actions.size(); ++a)
            if (mask & (ActionMask(1) << a)) acts.insert(m.actions[a]);
        out.assignment[m.vars[i]] = std::move(acts);
    }
    return out;
}

std::vector<PackedValuation> valuation_universe(const Mts& m) {
    if (m.actions.empty()) throw capacity_error("action alphabet is empty");
    if (m.actions.size() > max_actions)
        throw capacity_error("explicit synthesis supports at most 8 actions");
    if (m.vars.size() > max_vars)
        throw capacity_error("explicit synthesis supports at most 3 variables");
    std::size_t per_var = (std::size_t(1) << m.actions.size()) - 1;  // nonempty subsets
    std::size_t total = 1;
    for (std::size_t i = 0; i < m.vars.size(); ++i) total *= per_var;
    std::vector<PackedValuation> out;
    out.reserve(total);
    std::vector<ActionMask> masks(m.vars.size(), 1);
    if (m.vars.empty()) return {0};
    while (true) {
        PackedValuation v = 0;
        for (std::size_t i = 0; i < masks.size(); ++i) v |= PackedValuation(masks[i]) << (8 * i);
        out.push_back(v);
        std::size_t i = 0;
        for (; i < masks.size(); ++i) {
            if (masks[i] < per_var) {
                ++masks[i];
                break;
            }
            masks[i] = 1;
        }
        if (i == masks.size()) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

ValuationSet::ValuationSet(std::vector<PackedValuation> vals) : vals_(std::move(vals)) {
    std::sort(vals_.begin(), vals_.end());
    vals_.erase(std::unique(vals_.begin(), vals_.end()), vals_.end());
}

bool ValuationSet::contains(PackedValuation v) const {
    return std::binary_search(vals_.begin(), vals_.end(), v);
}

ValuationSet ValuationSet::unite(const ValuationSet& o) const {
    std::vector<PackedValuation> out;
    out.reserve(vals_.size() + o.vals_.size());
    std::set_union(vals_.begin(), vals_.end(), o.vals_.begin(), o.vals_.end(),
                   std::back_inserter(out));
    ValuationSet r;
    r.vals_ = std::move(out);
    return r;
}

ValuationSet ValuationSet::intersect(const ValuationSet& o) const {
    std::vector<PackedValuation> out;
    std::set_intersection(vals_.begin(), vals_.end(), o.vals_.begin(), o.vals_.end(),
                          std::back_inserter(out));
    ValuationSet r;
    r.vals_ = std::move(out);
    return r;
}

ValuationSet ValuationSet::complement(const std::vector<PackedValuation>& universe) const {
    std::vector<PackedValuation> out;
    std::set_difference(universe.begin(), universe.end(), vals_.begin(), vals_.end(),
                        std::back_inserter(out));
    ValuationSet r;
    r.vals_ = std::move(out);
    return r;
}

bool ValuationSet::subset_of(const ValuationSet& o) const {
    return std::includes(o.vals_.begin(), o.vals_.end(), vals_.begin(), vals_.end());
}

ValuationSet ValuationSet::filter_action_in_var(std::size_t var, std::size_t action) const {
    std::vector<PackedValuation> out;
    for (PackedValuation v : vals_)
        if (var_mask(v, var) & (ActionMask(1) << action)) out.push_back(v);
    ValuationSet r;
    r.vals_ = std::move(out);
    return r;
}

// ---------------------------------------------------------------------------
// Formula constructors
// ---------------------------------------------------------------------------

namespace {
FormulaPtr node(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
}  // namespace

FormulaPtr Formula::mk_true(bool value) {
    Formula f;
    f.kind = Kind::truth;
    f.truth_value = value;
    return node(std::move(f));
}

FormulaPtr Formula::mk_prop(std::string name) {
    Formula f;
    f.kind = Kind::prop;
    f.prop = std::move(name);
    return node(std::move(f));
}

FormulaPtr Formula::mk_not(FormulaPtr x) {
    Formula f;
    f.kind = Kind::neg;
    f.left = std::move(x);
    return node(std::move(f));
}

FormulaPtr Formula::mk_or(FormulaPtr a, FormulaPtr b) {
    Formula f;
    f.kind = Kind::disj;
    f.left = std::move(a);
    f.right = std::move(b);
    return node(std::move(f));
}

FormulaPtr Formula::mk_and(FormulaPtr a, FormulaPtr b) {
    return mk_not(mk_or(mk_not(std::move(a)), mk_not(std::move(b))));
}

FormulaPtr Formula::mk_ex(ActionSpec a, FormulaPtr x) {
    Formula f;
    f.kind = Kind::ex;
    f.alpha = std::move(a);
    f.left = std::move(x);
    return node(std::move(f));
}

FormulaPtr Formula::mk_eg(ActionSpec a, FormulaPtr x) {
    Formula f;
    f.kind = Kind::eg;
    f.alpha = std::move(a);
    f.left = std::move(x);
    return node(std::move(f));
}

FormulaPtr Formula::mk_eg_inf(ActionSpec a, FormulaPtr x) {
    Formula f;
    f.kind = Kind::eg_inf;
    f.alpha = std::move(a);
    f.left = std::move(x);
    return node(std::move(f));
}

FormulaPtr Formula::mk_eu(ActionSpec a, FormulaPtr x, FormulaPtr y) {
    Formula f;
    f.kind = Kind::eu;
    f.alpha = std::move(a);
    f.left = std::move(x);
    f.right = std::move(y);
    return node(std::move(f));
}

FormulaPtr Formula::mk_ef(ActionSpec a, FormulaPtr x) {
    return mk_eu(std::move(a), mk_true(), std::move(x));
}

std::string to_string(const Formula& f) {
    auto alpha = [](const ActionSpec& a) {
        if (a.is_var) return "[" + a.var + "]";
        std::string s = "[{";
        bool first = true;
        for (const auto& act : a.acts) {
            if (!first) s += ",";
            s += act;
            first = false;
        }
        return s + "}]";
    };
    switch (f.kind) {
        case Formula::Kind::truth: return f.truth_value ? "true" : "false";
        case Formula::Kind::prop: return f.prop;
        case Formula::Kind::neg: return "!(" + to_string(*f.left) + ")";
        case Formula::Kind::disj:
            return "(" + to_string(*f.left) + " | " + to_string(*f.right) + ")";
        case Formula::Kind::ex: return "E" + alpha(f.alpha) + " X (" + to_string(*f.left) + ")";
        case Formula::Kind::eg: return "E" + alpha(f.alpha) + " G (" + to_string(*f.left) + ")";
        case Formula::Kind::eg_inf:
            return "Ew" + alpha(f.alpha) + " G (" + to_string(*f.left) + ")";
        case Formula::Kind::eu:
            return "E" + alpha(f.alpha) + " (" + to_string(*f.left) + " U " +
                   to_string(*f.right) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Fixed-valuation evaluation (boolean fixed points)
// ---------------------------------------------------------------------------

namespace {

ActionMask resolve(const Mts& m, const ActionSpec& a, const std::vector<ActionMask>& var_vals) {
    if (a.is_var) return var_vals[m.var_index(a.var)];
    ActionMask mask = 0;
    for (const auto& act : a.acts) mask |= ActionMask(1) << m.action_index(act);
    return mask;
}

using StateSet = std::vector<bool>;

StateSet pre_over(const Mts& m, ActionMask b, const StateSet& target) {
    StateSet out(m.states.size(), false);
    for (const auto& t : m.transitions)
        if ((b & (ActionMask(1) << t.action)) && target[t.to]) out[t.from] = true;
    return out;
}

StateSet deadlocked(const Mts& m, ActionMask b) {
    StateSet out(m.states.size(), false);
    for (std::size_t s = 0; s < m.states.size(); ++s) out[s] = (m.out_mask(s) & b) == 0;
    return out;
}

StateSet eval_states(const Mts& m, const FormulaPtr& phi, const std::vector<ActionMask>& vv) {
    std::size_t n = m.states.size();
    switch (phi->kind) {
        case Formula::Kind::truth:
            return StateSet(n, phi->truth_value);
        case Formula::Kind::prop: {
            StateSet out(n, false);
            for (std::size_t s = 0; s < n; ++s) {
                auto it = m.labels.find(m.states[s]);
                out[s] = it != m.labels.end() && it->second.count(phi->prop);
            }
            return out;
        }
        case Formula::Kind::neg: {
            StateSet out = eval_states(m, phi->left, vv);
            out.flip();
            return out;
        }
        case Formula::Kind::disj: {
            StateSet a = eval_states(m, phi->left, vv);
            StateSet b = eval_states(m, phi->right, vv);
            for (std::size_t s = 0; s < n; ++s) a[s] = a[s] || b[s];
            return a;
        }
        case Formula::Kind::ex: {
            ActionMask b = resolve(m, phi->alpha, vv);
            return pre_over(m, b, eval_states(m, phi->left, vv));
        }
        case Formula::Kind::eg_inf: {
            ActionMask b = resolve(m, phi->alpha, vv);
            StateSet good = eval_states(m, phi->left, vv);
            StateSet cur = good;
            while (true) {
                StateSet pre = pre_over(m, b, cur);
                StateSet next(n, false);
                bool changed = false;
                for (std::size_t s = 0; s < n; ++s) {
                    next[s] = cur[s] && good[s] && pre[s];
                    changed |= next[s] != cur[s];
                }
                cur = std::move(next);
                if (!changed) break;
            }
            return cur;
        }
        case Formula::Kind::eg: {
            // Maximal paths may be finite: a deadlocked good state closes one.
            ActionMask b = resolve(m, phi->alpha, vv);
            StateSet good = eval_states(m, phi->left, vv);
            StateSet dead = deadlocked(m, b);
            StateSet cur = good;
            while (true) {
                StateSet pre = pre_over(m, b, cur);
                StateSet next(n, false);
                bool changed = false;
                for (std::size_t s = 0; s < n; ++s) {
                    next[s] = cur[s] && good[s] && (pre[s] || dead[s]);
                    changed |= next[s] != cur[s];
                }
                cur = std::move(next);
                if (!changed) break;
            }
            return cur;
        }
        case Formula::Kind::eu: {
            ActionMask b = resolve(m, phi->alpha, vv);
            StateSet keep = eval_states(m, phi->left, vv);
            StateSet goal = eval_states(m, phi->right, vv);
            StateSet cur = goal;
            while (true) {
                StateSet pre = pre_over(m, b, cur);
                bool changed = false;
                for (std::size_t s = 0; s < n; ++s) {
                    bool v = cur[s] || (keep[s] && pre[s]);
                    changed |= v != cur[s];
                    cur[s] = v;
                }
                if (!changed) break;
            }
            return cur;
        }
    }
    return StateSet(n, false);
}

}  // namespace

bool eval_fixed(const Mts& m, const ParamValuation& v, const FormulaPtr& phi,
                const std::string& state) {
    std::vector<ActionMask> vv(m.vars.size(), 0);
    PackedValuation packed = pack(m, v);
    for (std::size_t i = 0; i < m.vars.size(); ++i) vv[i] = var_mask(packed, i);
    return eval_states(m, phi, vv)[m.state_index(state)];
}

// ---------------------------------------------------------------------------
// Path enumeration (oracle)
// ---------------------------------------------------------------------------

namespace {

void extend_path(const Mts& m, ActionMask b, Path& cur, std::vector<Path>& out,
                 std::size_t bound) {
    std::size_t here = cur.states.back();
    if (cur.states.size() >= bound) {
        Path p = cur;
        p.truncated = true;
        out.push_back(std::move(p));
        return;
    }
    bool extended = false;
    for (const auto& t : m.transitions) {
        if (t.from != here || !(b & (ActionMask(1) << t.action))) continue;
        extended = true;
        auto seen = std::find(cur.states.begin(), cur.states.end(), t.to);
        if (seen != cur.states.end()) {
            Path p = cur;
            p.actions.push_back(t.action);
            p.lasso = true;
            p.lasso_start = static_cast<std::size_t>(seen - cur.states.begin());
            out.push_back(std::move(p));
            continue;
        }
        cur.states.push_back(t.to);
        cur.actions.push_back(t.action);
        extend_path(m, b, cur, out, bound);
        cur.states.pop_back();
        cur.actions.pop_back();
    }
    if (!extended) out.push_back(cur);  // deadlocked: maximal finite path
}

}  // namespace

std::vector<Path> enumerate_paths(const Mts& m, const std::set<std::string>& b,
                                  const std::string& state, std::size_t bound) {
    if (bound < 1) throw std::invalid_argument("path bound must be at least 1");
    ActionMask mask = 0;
    for (const auto& a : b) mask |= ActionMask(1) << m.action_index(a);
    Path start;
    start.states.push_back(m.state_index(state));
    std::vector<Path> out;
    extend_path(m, mask, start, out, bound);
    return out;
}

// ---------------------------------------------------------------------------
// Parametric synthesis
// ---------------------------------------------------------------------------

StateValFun par_pre(const Mts& m, const StateValFun& f, const std::string& y) {
    std::size_t yi = m.var_index(y);
    StateValFun out(m.states.size());
    for (const auto& t : m.transitions)
        out[t.from] = out[t.from].unite(f[t.to].filter_action_in_var(yi, t.action));
    return out;
}

StateValFun par_pre_universe(const Mts& m, const StateValFun& f, const std::string& y) {
    std::size_t yi = m.var_index(y);
    auto universe = valuation_universe(m);
    StateValFun out(m.states.size());
    for (std::size_t s = 0; s < m.states.size(); ++s) {
        std::vector<PackedValuation> hits;
        for (PackedValuation v : universe) {
            bool in = false;
            for (const auto& t : m.transitions) {
                if (t.from != s) continue;
                if (!(var_mask(v, yi) & (ActionMask(1) << t.action))) continue;
                if (f[t.to].contains(v)) {
                    in = true;
                    break;
                }
            }
            if (in) hits.push_back(v);
        }
        out[s] = ValuationSet(std::move(hits));
    }
    return out;
}

namespace {

// One-step predecessor for a concrete action set: valuations pass through
// untouched, only the graph matters.
StateValFun pre_concrete(const Mts& m, const StateValFun& f, ActionMask b) {
    StateValFun out(m.states.size());
    for (const auto& t : m.transitions)
        if (b & (ActionMask(1) << t.action)) out[t.from] = out[t.from].unite(f[t.to]);
    return out;
}

StateValFun pre_dispatch(const Mts& m, const StateValFun& f, const ActionSpec& a) {
    if (a.is_var) return par_pre(m, f, a.var);
    ActionMask mask = 0;
    for (const auto& act : a.acts) mask |= ActionMask(1) << m.action_index(act);
    return pre_concrete(m, f, mask);
}

// Valuations under which s has no outgoing action allowed by alpha.
ValuationSet deadlock_set(const Mts& m, const std::vector<PackedValuation>& universe,
                          std::size_t s, const ActionSpec& a) {
    ActionMask out = m.out_mask(s);
    if (!a.is_var) {
        ActionMask mask = 0;
        for (const auto& act : a.acts) mask |= ActionMask(1) << m.action_index(act);
        return (out & mask) == 0 ? ValuationSet(universe) : ValuationSet::none();
    }
    std::size_t yi = m.var_index(a.var);
    std::vector<PackedValuation> hits;
    for (PackedValuation v : universe)
        if ((var_mask(v, yi) & out) == 0) hits.push_back(v);
    return ValuationSet(std::move(hits));
}

bool same_fun(const StateValFun& a, const StateValFun& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

}  // namespace

StateValFun synthesize(const Mts& m, const FormulaPtr& phi) {
    auto universe = valuation_universe(m);
    std::size_t n = m.states.size();
    switch (phi->kind) {
        case Formula::Kind::truth: {
            StateValFun out(n);
            if (phi->truth_value)
                for (auto& s : out) s = ValuationSet(universe);
            return out;
        }
        case Formula::Kind::prop: {
            StateValFun out(n);
            for (std::size_t s = 0; s < n; ++s) {
                auto it = m.labels.find(m.states[s]);
                if (it != m.labels.end() && it->second.count(phi->prop))
                    out[s] = ValuationSet(universe);
            }
            return out;
        }
        case Formula::Kind::neg: {
            StateValFun in = synthesize(m, phi->left);
            StateValFun out(n);
            for (std::size_t s = 0; s < n; ++s) out[s] = in[s].complement(universe);
            return out;
        }
        case Formula::Kind::disj: {
            StateValFun a = synthesize(m, phi->left);
            StateValFun b = synthesize(m, phi->right);
            for (std::size_t s = 0; s < n; ++s) a[s] = a[s].unite(b[s]);
            return a;
        }
        case Formula::Kind::ex: {
            return pre_dispatch(m, synthesize(m, phi->left), phi->alpha);
        }
        case Formula::Kind::eg_inf: {
            StateValFun good = synthesize(m, phi->left);
            StateValFun cur = good;  // greatest fixed point from the top
            while (true) {
                StateValFun pre = pre_dispatch(m, cur, phi->alpha);
                StateValFun next(n);
                for (std::size_t s = 0; s < n; ++s) next[s] = good[s].intersect(pre[s]);
                if (same_fun(next, cur)) break;
                cur = std::move(next);
            }
            return cur;
        }
        case Formula::Kind::eg: {
            StateValFun good = synthesize(m, phi->left);
            std::vector<ValuationSet> dead(n);
            for (std::size_t s = 0; s < n; ++s) dead[s] = deadlock_set(m, universe, s, phi->alpha);
            StateValFun cur = good;
            while (true) {
                StateValFun pre = pre_dispatch(m, cur, phi->alpha);
                StateValFun next(n);
                for (std::size_t s = 0; s < n; ++s)
                    next[s] = good[s].intersect(pre[s].unite(dead[s]));
                if (same_fun(next, cur)) break;
                cur = std::move(next);
            }
            return cur;
        }
        case Formula::Kind::eu: {
            StateValFun keep = synthesize(m, phi->left);
            StateValFun goal = synthesize(m, phi->right);
            StateValFun cur = goal;  // least fixed point from the bottom
            while (true) {
                StateValFun pre = pre_dispatch(m, cur, phi->alpha);
                StateValFun next(n);
                for (std::size_t s = 0; s < n; ++s)
                    next[s] = goal[s].unite(keep[s].intersect(pre[s]));
                if (same_fun(next, cur)) break;
                cur = std::move(next);
            }
            return cur;
        }
    }
    return StateValFun(n);
}

std::vector<ParamValuation> minimal_valuations(const Mts& m, const ValuationSet& vs) {
    auto leq = [&](PackedValuation a, PackedValuation b) {
        for (std::size_t i = 0; i < m.vars.size(); ++i) {
            ActionMask ma = var_mask(a, i), mb = var_mask(b, i);
            if ((ma & mb) != ma) return false;  // ma ⊆ mb fails
        }
        return true;
    };
    std::vector<PackedValuation> minimal;
    for (PackedValuation v : vs.values()) {
        bool dominated = false;
        for (PackedValuation u : vs.values()) {
            if (u != v && leq(u, v) && !leq(v, u)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) minimal.push_back(v);
    }
    std::sort(minimal.begin(), minimal.end());
    std::vector<ParamValuation> out;
    out.reserve(minimal.size());
    for (PackedValuation v : minimal) out.push_back(unpack(m, v));
    return out;
}

}  // namespace paraverse::mts
