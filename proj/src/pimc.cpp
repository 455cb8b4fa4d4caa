#include "paraverse/pimc.hpp"

#include <algorithm>
#include <cassert>

namespace paraverse::pimc {

const ParamInterval* Pimc::interval(const std::string& from, const std::string& to) const {
    for (const auto& t : transitions)
        if (t.from == from && t.to == to) return &t.interval;
    return nullptr;
}

std::vector<std::string> Pimc::successors(const std::string& from) const {
    std::vector<std::string> out;
    for (const auto& t : transitions) {
        if (t.from != from) continue;
        const auto& i = t.interval;
        bool zero = !i.low.is_param && !i.up.is_param && i.low.value == 0 && i.up.value == 0;
        if (!zero) out.push_back(t.to);
    }
    return out;
}

bool Pimc::has_state(const std::string& s) const {
    return std::find(states.begin(), states.end(), s) != states.end();
}

Rational Mc::prob(const std::string& from, const std::string& to) const {
    auto it = matrix.find({from, to});
    return it == matrix.end() ? Rational(0) : it->second;
}

void Mc::validate() const {
    for (const auto& s : states) {
        Rational sum = 0;
        for (const auto& t : states) {
            Rational p = prob(s, t);
            if (p < 0 || p > 1)
                throw invalid_probability_error("probability out of range on " + s + " -> " + t);
            sum += p;
        }
        if (sum != 1) throw invalid_probability_error("row of " + s + " sums to " + rat_to_string(sum));
    }
}

VarContext param_context(const Pimc& p) {
    VarContext ctx;
    for (const auto& name : p.params) ctx.push_back(Var{name, VarKind::parameter});
    return ctx;
}

// ---------------------------------------------------------------------------
// Instantiation
// ---------------------------------------------------------------------------

Pimc instantiate(const Pimc& p, const Valuation& psi) {
    for (const auto& name : p.params) {
        if (!psi.has(name)) throw invalid_probability_error("no value for parameter '" + name + "'");
        const Rational& v = psi.at(name);
        if (v < 0 || v > 1)
            throw invalid_probability_error("value for '" + name + "' outside [0,1]");
    }
    auto fix = [&](const Endpoint& e) {
        return e.is_param ? Endpoint::of(psi.at(e.param)) : e;
    };
    Pimc out = p;
    out.params.clear();
    for (auto& t : out.transitions) {
        t.interval.low = fix(t.interval.low);
        t.interval.up = fix(t.interval.up);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Satisfaction (MC against IMC)
// ---------------------------------------------------------------------------

namespace {

// Adds  sum_i w_i * var_i + c  rel 0  with rational weights, scaled to keep
// variable coefficients integral.
void add_weighted(ConvexConstraint& c, const std::vector<std::pair<std::string, Rational>>& weights,
                  const Rational& constant, Rel rel) {
    Integer scale = 1;
    for (const auto& [name, w] : weights)
        mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), w.get_den().get_mpz_t());
    LinearTerm t;
    for (const auto& [name, w] : weights) {
        Rational scaled = w * Rational(scale);
        assert(scaled.get_den() == 1);
        t.add_var(name, Integer(scaled.get_num()));
    }
    t.constant = constant * Rational(scale);
    c.add(t, rel);
}

Rational endpoint_value(const Endpoint& e) {
    if (e.is_param) throw invalid_probability_error("operation requires a plain interval chain");
    return e.value;
}

struct DeltaProblem {
    ConvexConstraint constraint;
    std::vector<std::pair<std::string, std::string>> var_names;  // (t', s') per aux var
};

std::string delta_var(const std::string& t, const std::string& s) {
    return "d#" + t + "#" + s;
}

// Feasibility problem for one candidate pair (t, s): non-negative flows
// delta(t')(s'), one unit per implementation successor t', landing inside
// every specification interval, and only onto pairs still in the relation.
DeltaProblem delta_problem(const Mc& mc, const Pimc& imc, const std::string& t,
                           const std::string& s,
                           const std::set<std::pair<std::string, std::string>>& relation) {
    DeltaProblem out;
    std::vector<std::string> t_succ;
    for (const auto& t2 : mc.states)
        if (mc.prob(t, t2) > 0) t_succ.push_back(t2);

    VarContext ctx;
    for (const auto& t2 : t_succ) {
        for (const auto& s2 : imc.states) {
            if (!relation.count({t2, s2})) continue;  // forced to zero, variable omitted
            ctx.push_back(Var{delta_var(t2, s2), VarKind::aux});
            out.var_names.emplace_back(t2, s2);
        }
    }
    out.constraint = ConvexConstraint::top(ctx);

    for (const auto& v : ctx) out.constraint.add(LinearTerm::of_var(v.name, -1), Rel::le);  // >= 0

    for (const auto& t2 : t_succ) {  // each delta(t') is a distribution
        std::vector<std::pair<std::string, Rational>> row;
        for (const auto& s2 : imc.states)
            if (relation.count({t2, s2})) row.emplace_back(delta_var(t2, s2), 1);
        ConvexConstraint& c = out.constraint;
        add_weighted(c, row, -1, Rel::eq);
    }

    for (const auto& s2 : imc.states) {  // interval constraints on incoming mass
        std::vector<std::pair<std::string, Rational>> flow;
        for (const auto& t2 : t_succ)
            if (relation.count({t2, s2})) flow.emplace_back(delta_var(t2, s2), mc.prob(t, t2));
        const ParamInterval* iv = imc.interval(s, s2);
        Rational low = iv ? endpoint_value(iv->low) : Rational(0);
        Rational up = iv ? endpoint_value(iv->up) : Rational(0);
        add_weighted(out.constraint, flow, -low, Rel::ge);
        add_weighted(out.constraint, flow, -up, Rel::le);
    }
    return out;
}

}  // namespace

std::pair<bool, std::optional<CorrespondenceWitness>> satisfies(const Mc& mc, const Pimc& imc) {
    if (!imc.is_imc()) throw invalid_probability_error("satisfaction requires a plain interval chain");
    std::set<std::pair<std::string, std::string>> relation;
    for (const auto& t : mc.states) {
        for (const auto& s : imc.states) {
            auto lt = mc.labels.count(t) ? mc.labels.at(t) : std::set<std::string>{};
            auto ls = imc.labels.count(s) ? imc.labels.at(s) : std::set<std::string>{};
            if (lt == ls) relation.insert({t, s});
        }
    }
    // Refine to the greatest relation: drop pairs with no correspondence.
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = relation.begin(); it != relation.end();) {
            DeltaProblem dp = delta_problem(mc, imc, it->first, it->second, relation);
            if (!is_satisfiable(dp.constraint)) {
                it = relation.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }
    bool ok = relation.count({mc.initial, imc.initial}) != 0;
    if (!ok) return {false, std::nullopt};

    CorrespondenceWitness w;
    w.relation = relation;
    for (const auto& pair : relation) {
        DeltaProblem dp = delta_problem(mc, imc, pair.first, pair.second, relation);
        auto point = sample_point(dp.constraint);
        assert(point);
        auto& slot = w.delta[pair];
        for (const auto& [ts, var] : [&] {
                 std::vector<std::pair<std::pair<std::string, std::string>, std::string>> v;
                 for (const auto& name : dp.var_names)
                     v.push_back({name, delta_var(name.first, name.second)});
                 return v;
             }()) {
            Rational q = point->at(var);
            if (q != 0) slot[ts.first][ts.second] = q;
        }
    }
    return {true, std::move(w)};
}

// ---------------------------------------------------------------------------
// Bounded consistency
// ---------------------------------------------------------------------------

namespace {

// One pruning round: s stays when the (previously) surviving successors
// carry interval sums straddling 1, and every dropped successor could be
// given probability zero.
std::vector<bool> prune_step(const Pimc& imc, const std::vector<bool>& prev) {
    std::vector<bool> next(imc.states.size(), false);
    for (std::size_t i = 0; i < imc.states.size(); ++i) {
        const std::string& s = imc.states[i];
        Rational sum_low = 0, sum_up = 0;
        bool ok = true;
        for (const auto& s2 : imc.successors(s)) {
            const ParamInterval* iv = imc.interval(s, s2);
            Rational low = endpoint_value(iv->low);
            Rational up = endpoint_value(iv->up);
            std::size_t j = std::find(imc.states.begin(), imc.states.end(), s2) - imc.states.begin();
            if (prev[j]) {
                if (low > up) ok = false;  // kept interval must be well-formed
                sum_low += low;
                sum_up += up;
            } else if (low != 0) {
                ok = false;  // mandatory mass into a pruned state
            }
        }
        next[i] = ok && sum_low <= 1 && sum_up >= 1;
    }
    return next;
}

std::vector<bool> consistent_after(const Pimc& imc, std::size_t n) {
    std::vector<bool> level(imc.states.size(), true);
    level = prune_step(imc, level);  // level 0
    for (std::size_t k = 0; k < n; ++k) level = prune_step(imc, level);
    return level;
}

}  // namespace

bool n_consistent(const Pimc& imc, const std::string& s, std::size_t n) {
    if (!imc.is_imc()) throw invalid_probability_error("bounded consistency requires a plain interval chain");
    if (!imc.has_state(s)) throw std::runtime_error("unknown state '" + s + "'");
    auto level = consistent_after(imc, n);
    std::size_t i = std::find(imc.states.begin(), imc.states.end(), s) - imc.states.begin();
    return level[i];
}

std::pair<bool, std::optional<Mc>> is_consistent(const Pimc& imc) {
    if (!imc.is_imc()) throw invalid_probability_error("consistency requires a plain interval chain");
    std::size_t n = imc.states.size();
    auto good = consistent_after(imc, n);
    std::size_t init = std::find(imc.states.begin(), imc.states.end(), imc.initial) - imc.states.begin();
    if (!good[init]) return {false, std::nullopt};

    Mc w;
    w.states = imc.states;
    w.initial = imc.initial;
    w.props = imc.props;
    w.labels = imc.labels;
    for (std::size_t i = 0; i < imc.states.size(); ++i) {
        const std::string& s = imc.states[i];
        if (!good[i]) {
            w.matrix[{s, s}] = 1;  // unreachable filler row
            continue;
        }
        // Kept successors get their lower bounds, then the residual mass is
        // topped up in declaration order without breaching upper bounds.
        std::vector<std::pair<std::string, std::pair<Rational, Rational>>> kept;
        for (const auto& s2 : imc.successors(s)) {
            std::size_t j = std::find(imc.states.begin(), imc.states.end(), s2) - imc.states.begin();
            if (!good[j]) continue;
            const ParamInterval* iv = imc.interval(s, s2);
            kept.emplace_back(s2, std::make_pair(endpoint_value(iv->low), endpoint_value(iv->up)));
        }
        Rational residual = 1;
        for (const auto& [s2, lu] : kept) residual -= lu.first;
        assert(residual >= 0);
        for (const auto& [s2, lu] : kept) {
            Rational slack = lu.second - lu.first;
            Rational give = residual < slack ? residual : slack;
            w.matrix[{s, s2}] = lu.first + give;
            residual -= give;
        }
        assert(residual == 0);
    }
    w.validate();
    return {true, std::move(w)};
}

// ---------------------------------------------------------------------------
// Parametric consistency synthesis
// ---------------------------------------------------------------------------

namespace {

LinearTerm endpoint_term(const Endpoint& e) {
    return e.is_param ? LinearTerm::of_var(e.param) : LinearTerm::of_constant(e.value);
}

ConvexConstraint unit_box(const Pimc& p) {
    ConvexConstraint c = ConvexConstraint::top(param_context(p));
    for (const auto& name : p.params) {
        c.add(LinearTerm::of_var(name, -1), Rel::le);  // p >= 0
        LinearTerm up1 = LinearTerm::of_var(name);
        up1.constant -= 1;
        c.add(up1, Rel::le);  // p <= 1
    }
    return c;
}

}  // namespace

ConvexConstraint lc_constraint(const Pimc& p, const std::string& s,
                               const std::set<std::string>& keep) {
    ConvexConstraint c = unit_box(p);
    LinearTerm sum_up = LinearTerm::of_constant(-1);   // Σ up - 1 >= 0
    LinearTerm sum_low = LinearTerm::of_constant(-1);  // Σ low - 1 <= 0
    for (const auto& s2 : keep) {
        const ParamInterval* iv = p.interval(s, s2);
        if (!iv) continue;  // [0,0] contributes nothing
        LinearTerm low = endpoint_term(iv->low);
        LinearTerm up = endpoint_term(iv->up);
        sum_up += up;
        sum_low += low;
        LinearTerm wf = low;
        wf -= up;
        c.add(wf, Rel::le);  // low <= up
    }
    c.add(sum_up, Rel::ge);
    c.add(sum_low, Rel::le);
    return c;
}

ConstraintSet synthesize_consistency(const Pimc& p) {
    // Avoidable targets: destinations whose lower endpoint is zero or a
    // parameter, anywhere in the chain. A single avoid-set is applied at
    // every state of a branch.
    std::vector<std::string> avoidable;
    for (const auto& s : p.states) {
        for (const auto& s2 : p.successors(s)) {
            const ParamInterval* iv = p.interval(s, s2);
            bool can = iv->low.is_param || iv->low.value == 0;
            if (can && std::find(avoidable.begin(), avoidable.end(), s2) == avoidable.end())
                avoidable.push_back(s2);
        }
    }
    if (avoidable.size() > 16)
        throw std::runtime_error("too many avoidable states for explicit synthesis");

    VarContext ctx = param_context(p);
    ConstraintSet result = ConstraintSet::empty(ctx);
    std::size_t n = p.states.size();

    for (std::size_t mask = 0; mask < (std::size_t(1) << avoidable.size()); ++mask) {
        std::set<std::string> avoid;
        for (std::size_t b = 0; b < avoidable.size(); ++b)
            if (mask & (std::size_t(1) << b)) avoid.insert(avoidable[b]);

        // Per-state branch base: local consistency over the kept successors
        // plus zero lower bounds on every avoided transition.
        std::vector<ConvexConstraint> base;
        base.reserve(p.states.size());
        for (const auto& s : p.states) {
            std::set<std::string> keep;
            for (const auto& s2 : p.successors(s))
                if (!avoid.count(s2)) keep.insert(s2);
            ConvexConstraint c = lc_constraint(p, s, keep);
            for (const auto& s2 : p.successors(s)) {
                if (!avoid.count(s2)) continue;
                const ParamInterval* iv = p.interval(s, s2);
                c.add(endpoint_term(iv->low), Rel::eq);  // low = 0
            }
            base.push_back(std::move(c));
        }

        // Bounded recursion: level k at s intersects the bases of all kept
        // successors' level k-1 values.
        std::vector<ConvexConstraint> level = base;
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<ConvexConstraint> next;
            next.reserve(p.states.size());
            for (std::size_t i = 0; i < p.states.size(); ++i) {
                ConvexConstraint c = base[i];
                for (const auto& s2 : p.successors(p.states[i])) {
                    if (avoid.count(s2)) continue;
                    std::size_t j =
                        std::find(p.states.begin(), p.states.end(), s2) - p.states.begin();
                    c = conjoin(c, level[j]);
                }
                next.push_back(simplify(c));
            }
            level = std::move(next);
        }
        std::size_t init = std::find(p.states.begin(), p.states.end(), p.initial) - p.states.begin();
        result.add_disjunct(level[init]);
    }
    return simplify(result);
}

}  // namespace paraverse::pimc
