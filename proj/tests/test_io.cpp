#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "paraverse/parse.hpp"
#include "paraverse/results.hpp"
#include "testutil.hpp"

using namespace paraverse;
using namespace paraverse::io;

TEST_CASE("pta parsing") {
    auto coffee = parse_pta(testutil::read_file(testutil::corpus("coffee.pta")), "coffee.pta");
    CHECK(coffee.locations.size() == 4);
    CHECK(coffee.clocks.size() == 2);
    CHECK(coffee.params.size() == 3);
    CHECK(coffee.edges.size() == 6);
    CHECK(coffee.accepting == std::set<std::string>{"done"});
    CHECK(coffee.actions == std::vector<std::string>{"press", "cup", "coffee", "idle"});
}

TEST_CASE("empty input fails at 1:1") {
    try {
        parse_pta("", "empty.pta");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.span.line == 1);
        CHECK(e.span.column == 1);
    }
}

TEST_CASE("error spans point into the offending token") {
    try {
        parse_pta("clocks x;\nloc l0 invariant x <= oops;\ninit l0;", "bad.pta");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.span.line == 2);
        CHECK(e.span.column == 23);
        CHECK(e.span.length == 4);
    }
}

TEST_CASE("semantic problems are listed together") {
    try {
        parse_pta("clocks x; loc l0 invariant true; init nowhere;"
                  "edge l0 -> ghost sync a guard x <= 1 reset {y};",
                  "sem.pta");
        FAIL("expected a semantic error");
    } catch (const semantic_error& e) {
        CHECK(e.problems.size() == 3);
    }
}

TEST_CASE("guard shape is enforced") {
    CHECK_THROWS_AS(parse_pta("clocks x1 x2; loc l0 invariant true; init l0;"
                              "edge l0 -> l0 sync a guard x1 - x2 <= 1;",
                              "diff.pta"),
                    semantic_error);
    CHECK_THROWS_AS(parse_pta("clocks x1; params p; loc l0 invariant p <= 1; init l0;"
                              "edge l0 -> l0 sync a guard x1 <= 1;",
                              "noclock.pta"),
                    semantic_error);
}

TEST_CASE("pimc parsing keeps decimals exact") {
    auto c = parse_pimc("params q; state s0; state s1; trans s0 -> s1 [0.3, q];"
                        "trans s0 -> s0 [0.7, 0.7]; trans s1 -> s1 [1, 1];",
                        "small.pimc");
    const auto* iv = c.interval("s0", "s1");
    REQUIRE(iv);
    CHECK_FALSE(iv->low.is_param);
    CHECK(iv->low.value == rat(3, 10));
    CHECK(iv->up.is_param);
    CHECK(iv->up.param == "q");
    CHECK(print_pimc(c).find("3/10") != std::string::npos);
}

TEST_CASE("formula parsing") {
    auto m = parse_mts(testutil::read_file(testutil::corpus("fig7.mts")), "fig7.mts");

    auto f = parse_formula("E[Y] G (E[Z] F safe)", m);
    CHECK(f->kind == mts::Formula::Kind::eg);
    CHECK(f->alpha.is_var);
    CHECK(f->alpha.var == "Y");
    // F expanded into a true-Until.
    REQUIRE(f->left->kind == mts::Formula::Kind::eu);
    CHECK(f->left->left->kind == mts::Formula::Kind::truth);
    CHECK(f->left->right->prop == "safe");

    auto g = parse_formula("E[{left,right}] X p", m);
    CHECK_FALSE(g->alpha.is_var);
    CHECK(g->alpha.acts == std::set<std::string>{"left", "right"});

    auto h = parse_formula("Ew[Y] G p", m);
    CHECK(h->kind == mts::Formula::Kind::eg_inf);

    auto ops = parse_formula("!p | (E[Y](p U safe) & true)", m);
    CHECK(ops->kind == mts::Formula::Kind::disj);
    CHECK(ops->right->kind == mts::Formula::Kind::neg);  // & expands through negation

    CHECK_THROWS_AS(parse_formula("E[{}] X p", m), ParseError);
    CHECK_THROWS_AS(parse_formula("E[W] X p", m), ParseError);
    CHECK_THROWS_AS(parse_formula("E[Y] X nosuch", m), ParseError);
    CHECK_THROWS_AS(parse_formula("Ew[Y] X p", m), ParseError);
}

TEST_CASE("query parsing") {
    auto coffee = parse_pta(testutil::read_file(testutil::corpus("coffee.pta")), "coffee.pta");
    auto q1 = parse_pta_query("ef-synth {done}", coffee);
    CHECK(q1.kind == PtaQuery::Kind::ef_synth);
    CHECK(q1.targets == std::set<std::string>{"done"});

    auto q2 = parse_pta_query("reach at (p1 = 1, p2 = 5, p3 = 8) {done}", coffee);
    CHECK(q2.kind == PtaQuery::Kind::reach);
    REQUIRE(q2.at);
    CHECK(q2.at->at("p2") == rat(5));

    auto q3 = parse_pta_query("lu-emptiness {done}", coffee);
    CHECK(q3.kind == PtaQuery::Kind::lu_emptiness);
    CHECK(parse_pta_query("ip-check", coffee).kind == PtaQuery::Kind::ip_check);
    CHECK_THROWS_AS(parse_pta_query("ef-synth {nowhere}", coffee), ParseError);

    auto c = parse_pimc(testutil::read_file(testutil::corpus("fig4c.pimc")), "fig4c.pimc");
    auto cq = parse_pimc_query("consistent at (q = 1/2, p = 0.25)", c);
    CHECK(cq.kind == PimcQuery::Kind::consistent_at);
    CHECK(cq.at.at("p") == rat(1, 4));
    CHECK(parse_pimc_query("consistency-synth", c).kind == PimcQuery::Kind::consistency_synth);

    auto loan = parse_ppn(testutil::read_file(testutil::corpus("fig5.ppn")), "fig5.ppn");
    auto pq = parse_ppn_query("cover {loanOk: 1} exists", loan);
    CHECK(pq.kind == PpnQuery::Kind::cover);
    CHECK(pq.mode == PpnQuery::Mode::exists);
    CHECK(pq.marking.at("loanOk") == 1);
    auto pq2 = parse_ppn_query("reach {funds: 0, bank: 2} at (a=1,b=1,c=1,d=1,e=1,f=1)", loan);
    CHECK(pq2.kind == PpnQuery::Kind::reach);
    CHECK(pq2.valuation.at("c") == 1);
    auto pq3 = parse_ppn_query("simultaneous {funds, bank} at (a=0,b=1,c=0,d=9,e=0,f=0)", loan);
    CHECK(pq3.kind == PpnQuery::Kind::simultaneous);
    CHECK_THROWS_AS(parse_ppn_query("reach {funds: 1} forall", loan), ParseError);
    CHECK_THROWS_AS(parse_ppn_query("cover {ghost: 1}", loan), ParseError);
}

TEST_CASE("round-trip: parse, print, parse") {
    for (const auto& name : {"coffee.pta", "coffee_lu.pta", "fig3a.pta", "fig3b.pta"}) {
        std::string text = testutil::read_file(testutil::corpus(name));
        auto once = parse_pta(text, name);
        auto twice = parse_pta(print_pta(once), name);
        CHECK(print_pta(once) == print_pta(twice));
        CHECK(once.locations == twice.locations);
        CHECK(once.edges.size() == twice.edges.size());
        for (std::size_t i = 0; i < once.edges.size(); ++i) {
            CHECK(once.edges[i].source == twice.edges[i].source);
            CHECK(once.edges[i].resets == twice.edges[i].resets);
            CHECK(convex_contained(once.edges[i].guard, {twice.edges[i].guard}));
            CHECK(convex_contained(twice.edges[i].guard, {once.edges[i].guard}));
        }
    }
    for (const auto& name : {"fig4a.pimc", "fig4b.pimc", "fig4c.pimc"}) {
        std::string text = testutil::read_file(testutil::corpus(name));
        auto once = parse_pimc(text, name);
        auto twice = parse_pimc(print_pimc(once), name);
        CHECK(print_pimc(once) == print_pimc(twice));
        CHECK(once.transitions.size() == twice.transitions.size());
    }
    {
        std::string text = testutil::read_file(testutil::corpus("fig7.mts"));
        auto once = parse_mts(text, "fig7.mts");
        auto twice = parse_mts(print_mts(once), "fig7.mts");
        CHECK(print_mts(once) == print_mts(twice));
        CHECK(once.transitions.size() == twice.transitions.size());
    }
    {
        std::string text = testutil::read_file(testutil::corpus("fig5.ppn"));
        auto once = parse_ppn(text, "fig5.ppn");
        auto twice = parse_ppn(print_ppn(once), "fig5.ppn");
        CHECK(print_ppn(once) == print_ppn(twice));
        CHECK(once.pre == twice.pre);
        CHECK(once.transitions == twice.transitions);
    }
}

TEST_CASE("result JSON round-trips") {
    VarContext pctx{{"p1", VarKind::parameter}, {"p2", VarKind::parameter},
                    {"p3", VarKind::parameter}};
    ConstraintSet set =
        ConstraintSet::of(parse_constraint("p1 >= 0 && 0 <= p2 && p2 <= p3", pctx));
    Result r = result_of(set, true);
    std::string text = emit_result(r);
    CHECK(text.find("\"schema\": \"paraverse/1\"") != std::string::npos);
    Result back = read_result(text);
    CHECK(emit_result(back) == text);
    CHECK(set_equal(*back.cset, set));

    Result empty = result_of(ConstraintSet::empty(pctx), true);
    std::string etext = emit_result(empty);
    CHECK(etext.find("\"disjuncts\": []") != std::string::npos);
    CHECK(emit_result(read_result(etext)) == etext);

    Result v = result_verdict("yes", {{"witness", "x = 0"}});
    CHECK(emit_result(read_result(emit_result(v))) == emit_result(v));

    Result vf;
    vf.kind = Result::Kind::valuation_fun;
    vf.vf_vars = {"Y", "Z"};
    mts::ParamValuation pv;
    pv.assignment["Y"] = {"left"};
    pv.assignment["Z"] = {"forw", "left"};
    vf.vf_states.emplace_back("s0", std::vector<mts::ParamValuation>{pv});
    vf.vf_minimal = {pv};
    CHECK(emit_result(read_result(emit_result(vf))) == emit_result(vf));

    Result km;
    km.kind = Result::Kind::km_summary;
    km.km_bounded = false;
    km.km_nodes = 7;
    km.km_unbounded_sets = {{"p", "q"}};
    CHECK(emit_result(read_result(emit_result(km))) == emit_result(km));
}

TEST_CASE("constraint atoms serialize in spec shape") {
    VarContext pctx{{"p1", VarKind::parameter}, {"p2", VarKind::parameter}};
    ConstraintSet set = ConstraintSet::of(parse_constraint("2*p1 <= p2", pctx));
    std::string text = emit_result(result_of(set, true));
    CHECK(text.find("\"term\"") != std::string::npos);
    CHECK(text.find("\"rel\": \"<=\"") != std::string::npos);
    CHECK(text.find("\"p1\": 2") != std::string::npos);
    CHECK(text.find("\"p2\": -1") != std::string::npos);
}
