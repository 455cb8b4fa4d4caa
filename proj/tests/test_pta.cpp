#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "paraverse/parse.hpp"
#include "paraverse/pta.hpp"
#include "testutil.hpp"

#include <random>

using namespace paraverse;
using namespace paraverse::pta;

namespace {

Pta load(const std::string& name) {
    return io::parse_pta(testutil::read_file(testutil::corpus(name)), name);
}

Valuation pvals(Rational p1, Rational p2, Rational p3) {
    Valuation v;
    v.set("p1", std::move(p1));
    v.set("p2", std::move(p2));
    v.set("p3", std::move(p3));
    return v;
}

ConvexConstraint zone(const Pta& a, const std::string& text) {
    return io::parse_constraint(text, a.full_context());
}

}  // namespace

TEST_CASE("instantiate substitutes parameters") {
    Pta coffee = load("coffee.pta");
    Pta ta = instantiate(coffee, pvals(1, 5, 8));
    CHECK(ta.params.empty());
    // The sugar press guard became x1 >= 1.
    Valuation ok;
    ok.set("x1", 1);
    ok.set("x2", 3);
    CHECK(satisfies(ta.edges[1].guard, ok));
    ok.set("x1", rat(1, 2));
    CHECK_FALSE(satisfies(ta.edges[1].guard, ok));

    CHECK_THROWS_AS(instantiate(coffee, pvals(1, 5, rat(-1))), invalid_parameter_error);
    Valuation partial;
    partial.set("p1", 1);
    CHECK_THROWS_AS(instantiate(coffee, partial), invalid_parameter_error);

    // Coefficients multiply through: 2*p1 <= x becomes 3 <= x at p1 = 3/2.
    VarContext ctx{{"x", VarKind::clock}, {"p1", VarKind::parameter}};
    auto g = io::parse_constraint("2*p1 <= x", ctx);
    auto inst = substitute(g, "p1", rat(3, 2));
    Valuation w;
    w.set("x", 3);
    CHECK(satisfies(inst, w));
    w.set("x", rat(29, 10));
    CHECK_FALSE(satisfies(inst, w));
}

TEST_CASE("replay follows the six-step run") {
    Pta coffee = load("coffee.pta");
    Pta ta = instantiate(coffee, pvals(1, 5, 8));
    std::vector<ScriptStep> script{
        {rat(0), 0}, {rat(89, 50), 1}, {rat(121, 50), 1}, {rat(4, 5), 2}, {rat(3), 3}, {rat(0), 4},
    };
    Run run = replay(ta, script);
    CHECK(run.states.size() == 7);
    CHECK(run.states.back().location == "add_sugar");
    CHECK_FALSE(run.accepting);
    CHECK(run.total_time == rat(8));
    CHECK(run.states[3].clock_val.at("x1") == 0);
    CHECK(run.states[3].clock_val.at("x2") == rat(21, 5));
    CHECK(run.states[4].clock_val.at("x1") == rat(4, 5));
    CHECK(run.states[5].clock_val.at("x2") == rat(8));

    auto wt = words_and_trace(coffee, run);
    CHECK(wt.word == std::vector<std::string>{"press", "press", "press", "cup", "coffee", "press"});
    CHECK_FALSE(wt.accepting);
    CHECK(wt.trace.front() == "idle");
    CHECK(wt.trace.back() == "add_sugar");

    // Empty script: just the initial state.
    Run still = replay(ta, {});
    CHECK(still.states.size() == 1);
    CHECK(still.total_time == 0);
    auto wt0 = words_and_trace(coffee, still);
    CHECK(wt0.word.empty());
    CHECK(wt0.trace == std::vector<std::string>{"idle"});

    // Pressing again before p1 elapsed is rejected.
    std::vector<ScriptStep> too_fast{{rat(0), 0}, {rat(1, 2), 1}};
    CHECK_THROWS_AS(replay(ta, too_fast), step_rejected_error);

    // One press straight to delivery is accepting.
    std::vector<ScriptStep> quick{{rat(0), 0}, {rat(5), 2}, {rat(3), 3}};
    Run fast = replay(ta, quick);
    CHECK(fast.accepting);
    auto wtf = words_and_trace(coffee, fast);
    CHECK(wtf.word == std::vector<std::string>{"press", "cup", "coffee"});
    CHECK(wtf.accepting);
}

TEST_CASE("initial symbolic state") {
    Pta coffee = load("coffee.pta");
    SymbolicState s0 = initial_symbolic(coffee);
    CHECK(s0.location == "idle");
    CHECK(zone_equal(coffee, s0.zone, zone(coffee, "x1 = x2 && x1 >= 0")));

    Pta bounded = io::parse_pta(
        "clocks x1 x2; params p;"
        "loc l0 invariant x1 <= p; init l0;"
        "edge l0 -> l0 sync a guard true reset {x1};",
        "<inline>");
    SymbolicState b0 = initial_symbolic(bounded);
    CHECK(zone_equal(bounded, b0.zone,
                     io::parse_constraint("x1 = x2 && 0 <= x1 && x1 <= p", bounded.full_context())));

    Pta dead = io::parse_pta(
        "clocks x; loc l0 invariant x <= 0 && x >= 1; init l0;"
        "edge l0 -> l0 sync a guard true;",
        "<inline>");
    CHECK_THROWS_AS(initial_symbolic(dead), empty_initial_state_error);
}

TEST_CASE("succ reproduces the displayed symbolic run") {
    Pta coffee = load("coffee.pta");
    SymbolicState s = initial_symbolic(coffee);

    auto step = [&](std::size_t edge) {
        auto next = succ(coffee, s, coffee.edges[edge]);
        REQUIRE(next);
        s = *next;
    };

    step(0);  // press
    CHECK(s.location == "add_sugar");
    CHECK(zone_equal(coffee, s.zone, zone(coffee, "x1 = x2 && 0 <= x2 && x2 <= p2")));

    step(1);  // press
    CHECK(zone_equal(coffee, s.zone,
                     zone(coffee, "p1 <= x2 - x1 && x2 - x1 <= p2 && 0 <= x2 && x2 <= p2")));

    step(1);  // press
    CHECK(zone_equal(coffee, s.zone,
                     zone(coffee, "2*p1 <= x2 - x1 && x2 - x1 <= p2 && 0 <= x2 && x2 <= p2")));

    step(2);  // cup
    CHECK(s.location == "preparing_coffee");
    CHECK(zone_equal(coffee, s.zone,
                     zone(coffee, "2*p1 <= x2 - x1 && x2 - x1 <= p2 && p2 <= x2 && x2 <= p3")));

    step(3);  // coffee
    CHECK(s.location == "done");
    CHECK(zone_equal(coffee, s.zone,
                     zone(coffee, "0 <= x1 && x1 <= 10 && x2 - x1 = p3 && 2*p1 <= p2 && p2 <= p3")));

    step(4);  // press
    CHECK(s.location == "add_sugar");
    CHECK(zone_equal(coffee, s.zone,
                     zone(coffee, "x1 = x2 && 0 <= x2 && x2 <= p2 && 2*p1 <= p2 && p2 <= p3")));

    // Unsatisfiable guard: no successor.
    Pta neg = io::parse_pta(
        "clocks x; loc l0 invariant true; loc l1 invariant true; init l0;"
        "edge l0 -> l1 sync a guard x <= -1;",
        "<inline>");
    auto none = succ(neg, initial_symbolic(neg), neg.edges[0]);
    CHECK_FALSE(none.has_value());
}

TEST_CASE("ef synthesis on the dispenser terminates") {
    Pta coffee = load("coffee.pta");
    auto res = ef_synthesis(coffee, {"done"}, {});
    CHECK(res.complete);

    VarContext pctx = coffee.params;
    ConstraintSet expected =
        ConstraintSet::of(io::parse_constraint("p1 >= 0 && 0 <= p2 && p2 <= p3", pctx));
    CHECK(set_equal(res.constraints, expected));

    // Unreachable target: empty but complete.
    Pta island = io::parse_pta(
        "clocks x; loc l0 invariant true; loc far invariant true; init l0;"
        "edge l0 -> l0 sync a guard true;",
        "<inline>");
    auto nores = ef_synthesis(island, {"far"}, {});
    CHECK(nores.complete);
    CHECK(nores.constraints.is_empty());

    // Initial location: at least the invariant-feasible parameter space.
    auto self = ef_synthesis(coffee, {"idle"}, {});
    Valuation any = pvals(3, 1, 7);
    CHECK(satisfies(self.constraints, any));
}

TEST_CASE("lemma bridge: symbolic projection agrees with concrete reachability") {
    Pta coffee = load("coffee.pta");
    auto res = ef_synthesis(coffee, {"done"}, {});
    REQUIRE(res.complete);
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> pick(0, 12);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        Valuation v = pvals(pick(rng), pick(rng), pick(rng));
        bool symbolic = satisfies(res.constraints, v);
        bool concrete = concrete_reach(instantiate(coffee, v), {"done"});
        REQUIRE(symbolic == concrete);
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("classify_lu") {
    Pta coffee = load("coffee.pta");
    CHECK_FALSE(classify_lu(coffee).is_lu);

    Pta weak = load("coffee_lu.pta");
    auto lu = classify_lu(weak);
    REQUIRE(lu.is_lu);
    CHECK(lu.lower == std::set<std::string>{"p1"});
    CHECK(lu.upper == std::set<std::string>{"p2", "p3"});
    CHECK_FALSE(lu.l_only());
    CHECK_FALSE(lu.u_only());

    Pta plain = io::parse_pta(
        "clocks x; loc l0 invariant true; init l0; edge l0 -> l0 sync a guard x <= 3;",
        "<inline>");
    auto trivially = classify_lu(plain);
    CHECK(trivially.is_lu);
    CHECK(trivially.lower.empty());
    CHECK(trivially.upper.empty());

    // Renaming parameters keeps the verdict shape.
    Pta renamed = load("coffee_lu.pta");
    auto rename_term = [](LinearTerm& t) {
        LinearTerm out;
        out.constant = t.constant;
        for (const auto& [n, c] : t.coeffs) out.add_var(n[0] == 'p' ? "q_" + n : n, c);
        t = out;
    };
    for (auto& v : renamed.params) v.name = "q_" + v.name;
    for (auto& [loc, inv] : renamed.invariants)
        for (auto& atom : inv.atoms) rename_term(atom.term);
    for (auto& e : renamed.edges)
        for (auto& atom : e.guard.atoms) rename_term(atom.term);
    auto lu2 = classify_lu(renamed);
    REQUIRE(lu2.is_lu);
    CHECK(lu2.lower.size() == 1);
    CHECK(lu2.upper.size() == 2);
}

TEST_CASE("lu_ef_emptiness") {
    Pta weak = load("coffee_lu.pta");
    CHECK_FALSE(lu_ef_emptiness(weak, {"done"}));  // reachable, set nonempty

    Pta coffee = load("coffee.pta");
    CHECK_THROWS_AS(lu_ef_emptiness(coffee, {"done"}), not_lu_error);

    // Guard x <= pu is dropped at the limit, enabling the edge.
    Pta gate = io::parse_pta(
        "clocks x; params pu;"
        "loc l0 invariant true; loc goal invariant true; init l0;"
        "edge l0 -> goal sync a guard x <= pu;",
        "<inline>");
    CHECK_FALSE(lu_ef_emptiness(gate, {"goal"}));

    Pta island = io::parse_pta(
        "clocks x; params pu;"
        "loc l0 invariant true; loc far invariant true; init l0;"
        "edge l0 -> l0 sync a guard x <= pu;",
        "<inline>");
    CHECK(lu_ef_emptiness(island, {"far"}));
}

TEST_CASE("concrete_reach") {
    Pta coffee = load("coffee.pta");
    CHECK(concrete_reach(instantiate(coffee, pvals(1, 2, 3)), {"done"}));
    CHECK_FALSE(concrete_reach(instantiate(coffee, pvals(1, 5, 4)), {"done"}));
    CHECK(concrete_reach(instantiate(coffee, pvals(1, 5, 4)), {"idle"}));
    // Rational constants get rescaled away.
    CHECK(concrete_reach(instantiate(coffee, pvals(rat(1, 2), rat(5, 2), rat(7, 2))), {"done"}));
}

TEST_CASE("ip_check verdicts") {
    Pta a3 = load("fig3a.pta");
    auto ra = ip_check(a3, {}, 16);
    REQUIRE(ra.verdict == Ternary::no);
    REQUIRE(ra.witness);
    CHECK(ra.witness->location == "l3");

    Pta b3 = load("fig3b.pta");
    auto rb = ip_check(b3, {}, 16);
    CHECK(rb.verdict == Ternary::yes);

    Pta coffee = load("coffee.pta");
    auto rc = ip_check(coffee, ExploreLimits{40, 40}, 16);
    CHECK(rc.verdict == Ternary::unknown);
}

TEST_CASE("ec_check") {
    Pta coffee = load("coffee.pta");
    CHECK(ec_check(instantiate(coffee, pvals(1, 2, 3))) == EcVerdict::yes);

    Pta lonely = io::parse_pta(
        "clocks x; loc l0 invariant true; loc l1 invariant true; init l0;"
        "edge l0 -> l1 sync a guard x <= -1;",
        "<inline>");
    CHECK(ec_check(lonely) == EcVerdict::unknown);

    Pta loop = io::parse_pta(
        "clocks x; loc l0 invariant true; init l0; edge l0 -> l0 sync a guard true;",
        "<inline>");
    CHECK(ec_check(loop) == EcVerdict::yes);
}

// ---------------------------------------------------------------------------
// Randomized properties
// ---------------------------------------------------------------------------

namespace {

Pta random_pta(std::mt19937& rng, bool lu_style) {
    std::uniform_int_distribution<int> nloc(2, 4), nedge(2, 6), coin(0, 1), cpick(0, 5);
    Pta a;
    a.clocks = {{"x1", VarKind::clock}, {"x2", VarKind::clock}};
    a.params = {{"pl", VarKind::parameter}, {"pu", VarKind::parameter}};
    int locs = nloc(rng);
    for (int i = 0; i < locs; ++i) a.locations.push_back("L" + std::to_string(i));
    a.initial = "L0";
    VarContext ctx = a.full_context();
    auto guard = [&](bool invariant) {
        ConvexConstraint c = ConvexConstraint::top(ctx);
        int style = cpick(rng);
        std::string x = coin(rng) ? "x1" : "x2";
        LinearTerm t = LinearTerm::of_var(x);
        if (style == 0) {
            t.constant = -Rational(cpick(rng));
            c.add(t, Rel::le);
        } else if (style == 1 && !invariant && !lu_style) {
            t.add_var("pl", -1);
            c.add(t, Rel::eq);  // both polarities at once
        } else if (style <= 3) {
            t.add_var("pu", -1);
            c.add(t, coin(rng) ? Rel::le : Rel::lt);  // x <= pu
        } else {
            t.add_var("pl", -1);
            c.add(t, coin(rng) ? Rel::ge : Rel::gt);  // x >= pl
        }
        return c;
    };
    for (const auto& l : a.locations)
        a.invariants[l] = coin(rng) ? guard(true) : ConvexConstraint::top(ctx);
    int edges = nedge(rng);
    std::uniform_int_distribution<std::size_t> lpick(0, a.locations.size() - 1);
    for (int i = 0; i < edges; ++i) {
        Edge e;
        e.source = a.locations[lpick(rng)];
        e.target = a.locations[lpick(rng)];
        e.action = "a" + std::to_string(i);
        e.guard = guard(false);
        if (coin(rng)) e.resets.insert("x1");
        if (coin(rng)) e.resets.insert("x2");
        a.edges.push_back(std::move(e));
    }
    for (const auto& e : a.edges) a.actions.push_back(e.action);
    return a;
}

}  // namespace

TEST_CASE("property: succ is monotone in the source zone") {
    std::mt19937 rng(501);
    int done = 0;
    while (done < 150) {
        Pta a = random_pta(rng, false);
        SymbolicState s0;
        try {
            s0 = initial_symbolic(a);
        } catch (const empty_initial_state_error&) {
            continue;
        }
        ConvexConstraint smaller = s0.zone;
        LinearTerm extra = LinearTerm::of_var("x1");
        extra.constant = -2;
        smaller.add(extra, Rel::le);
        if (!is_satisfiable(smaller)) continue;
        SymbolicState small{a.initial, smaller};
        for (const auto& e : a.edges) {
            if (e.source != a.initial) continue;
            auto big_next = succ(a, s0, e);
            auto small_next = succ(a, small, e);
            if (small_next) {
                REQUIRE(big_next);
                REQUIRE(zone_contains(a, big_next->zone, small_next->zone));
            }
        }
        ++done;
    }
}

TEST_CASE("property: lower/upper monotonicity of scripted runs") {
    std::mt19937 rng(502);
    std::uniform_int_distribution<int> val(0, 4), len(1, 5);
    int done = 0;
    while (done < 120) {
        Pta a = random_pta(rng, true);
        auto lu = classify_lu(a);
        if (!lu.is_lu) continue;

        Valuation v;
        v.set("pl", val(rng));
        v.set("pu", val(rng));
        Pta inst = instantiate(a, v);

        // Sample a valid script by greedy simulation.
        std::vector<ScriptStep> script;
        ConcreteState state{a.initial, {}};
        for (const auto& c : a.clocks) state.clock_val.set(c.name, 0);
        if (!satisfies(inst.invariant(a.initial), state.clock_val)) continue;
        int steps = len(rng);
        for (int k = 0; k < steps; ++k) {
            bool advanced = false;
            for (std::size_t ei = 0; ei < inst.edges.size() && !advanced; ++ei) {
                const Edge& e = inst.edges[ei];
                if (e.source != state.location) continue;
                for (int d = 0; d <= 6 && !advanced; ++d) {
                    Valuation after = state.clock_val;
                    for (auto& [name, q] : after.values) q += d;
                    if (!satisfies(inst.invariant(state.location), after)) break;
                    if (!satisfies(e.guard, after)) continue;
                    Valuation next = after;
                    for (const auto& r : e.resets) next.set(r, 0);
                    if (!satisfies(inst.invariant(e.target), next)) continue;
                    script.push_back({rat(d), ei});
                    state = {e.target, next};
                    advanced = true;
                }
            }
            if (!advanced) break;
        }
        if (script.empty()) continue;
        REQUIRE_NOTHROW(replay(inst, script));

        // Shrink lower bounds, grow upper bounds: the script must replay.
        Valuation relaxed;
        relaxed.set("pl", lu.lower.count("pl") ? Rational(0) : v.at("pl"));
        relaxed.set("pu", lu.upper.count("pu") ? v.at("pu") + 2 : v.at("pu"));
        if (lu.upper.count("pl")) relaxed.set("pl", v.at("pl") + 2);
        if (lu.lower.count("pu")) relaxed.set("pu", 0);
        Pta relaxed_inst = instantiate(a, relaxed);
        REQUIRE_NOTHROW(replay(relaxed_inst, script));
        ++done;
    }
}
