#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "paraverse/parse.hpp"
#include "paraverse/ppn.hpp"
#include "testutil.hpp"

#include <random>

using namespace paraverse;
using namespace paraverse::ppn;

namespace {

Ppn load_loan() {
    return io::parse_ppn(testutil::read_file(testutil::corpus("fig5.ppn")), "fig5.ppn");
}

Ppn net(const std::string& text) {
    return io::parse_ppn(text, "<inline>");
}

std::map<std::string, std::uint64_t> uniform(const Ppn& n, std::uint64_t k) {
    std::map<std::string, std::uint64_t> v;
    for (const auto& p : n.params) v[p] = k;
    return v;
}

}  // namespace

TEST_CASE("instantiate") {
    Ppn loan = load_loan();
    auto v = uniform(loan, 0);
    v["a"] = 7;
    Ppn inst = instantiate(loan, v);
    CHECK(inst.is_plain());
    CHECK(initial_marking(inst)[inst.place_index("funds")] == 7);

    Ppn plain = net("place p init 1; trans t pre {p: 1};");
    Ppn same = instantiate(plain, {});
    CHECK(initial_marking(same) == initial_marking(plain));

    CHECK_THROWS_AS(instantiate(loan, std::map<std::string, std::uint64_t>{{"a", 1}}),
                    invalid_net_valuation_error);
}

TEST_CASE("fire") {
    Ppn two = net("place p init 1; trans t pre {p: 2};");
    CHECK_FALSE(fire(two, initial_marking(two), "t"));

    Ppn free_t = net("place p; trans t post {p: 1};");
    Marking m = initial_marking(free_t);
    for (int i = 0; i < 3; ++i) {
        auto next = fire(free_t, m, "t");
        REQUIRE(next);
        m = *next;
    }
    CHECK(m[free_t.place_index("p")] == 3);

    Ppn move = net("place p0 init 1; place p1; trans t pre {p0: 1} post {p1: 1};");
    auto moved = fire(move, initial_marking(move), "t");
    REQUIRE(moved);
    CHECK((*moved)[move.place_index("p0")] == 0);
    CHECK((*moved)[move.place_index("p1")] == 1);
}

TEST_CASE("classify") {
    Ppn pre_only = net("params a; place p init 1; trans t pre {p: a} post {p: 1};");
    auto c1 = classify(pre_only);
    CHECK(c1.is_pre_t);
    CHECK_FALSE(c1.is_post_t);
    CHECK(c1.is_distinct_t);
    CHECK_FALSE(c1.is_p);
    CHECK_FALSE(c1.is_plain);

    Ppn both = net("params a; place p init 1; trans t pre {p: a} post {p: a};");
    auto c2 = classify(both);
    CHECK_FALSE(c2.is_pre_t);
    CHECK_FALSE(c2.is_post_t);
    CHECK_FALSE(c2.is_distinct_t);
    CHECK_FALSE(c2.is_p);

    Ppn marked = net("params a; place p init a; trans t pre {p: 1} post {p: 2};");
    auto c3 = classify(marked);
    CHECK(c3.is_p);
    CHECK_FALSE(c3.is_pre_t);
    CHECK_FALSE(c3.is_post_t);

    Ppn loan = load_loan();
    auto c4 = classify(loan);
    CHECK_FALSE(c4.is_pre_t);
    CHECK_FALSE(c4.is_post_t);
    CHECK_FALSE(c4.is_p);
    CHECK_FALSE(c4.is_distinct_t);  // c sits on both sides
    CHECK_FALSE(c4.is_plain);

    CHECK(classify(net("place p;")).is_plain);
}

TEST_CASE("karp-miller basics") {
    Ppn producer = net("place p; trans t post {p: 1};");
    KmTree t1 = km_analyze(producer);
    CHECK_FALSE(t1.bounded);
    REQUIRE(t1.unbounded_place_sets.size() == 1);
    CHECK(t1.unbounded_place_sets[0] == std::set<std::string>{"p"});

    Ppn frozen = net("place p init 3;");
    KmTree t2 = km_analyze(frozen);
    CHECK(t2.bounded);
    CHECK(t2.nodes.size() == 1);

    Ppn pair = net("place p; place q; trans tp post {p: 1}; trans tq post {q: 1};");
    KmTree t3 = km_analyze(pair);
    CHECK_FALSE(t3.bounded);
    bool simultaneous = false;
    for (const auto& s : t3.unbounded_place_sets)
        simultaneous |= s.count("p") && s.count("q");
    CHECK(simultaneous);
    // Explicit exploration corroborates: both counters really grow together.
    Marking m = initial_marking(pair);
    for (int i = 0; i < 20; ++i) {
        m = *fire(pair, m, "tp");
        m = *fire(pair, m, "tq");
    }
    CHECK(m[pair.place_index("p")] == 20);
    CHECK(m[pair.place_index("q")] == 20);
}

TEST_CASE("coverable") {
    Ppn move = net("place p0 init 2; place p1; trans t pre {p0: 1} post {p1: 1};");
    CHECK(coverable(move, initial_marking(move)));
    CHECK(coverable(move, to_marking(move, {{"p1", 2}})));
    CHECK_FALSE(coverable(move, to_marking(move, {{"p1", 3}})));

    Ppn dry = net("place p0 init 1; place orphan; trans t pre {p0: 1} post {p0: 1};");
    CHECK_FALSE(coverable(dry, to_marking(dry, {{"orphan", 1}})));

    Ppn producer = net("place p; trans t post {p: 1};");
    CHECK(coverable(producer, to_marking(producer, {{"p", 1000}})));
}

TEST_CASE("existential coverability dispatch") {
    // Parameters on input arcs only: the all-zero valuation decides.
    Ppn pre_t = net("params a; place p0; place p1; trans t pre {p0: a} post {p1: 1};");
    auto r1 = existential_coverable(pre_t, {{"p1", 1}});
    CHECK(r1.verdict == Verdict::yes);
    REQUIRE(r1.witness);
    CHECK(r1.witness->valuation.at("a") == 0);
    // The witness run replays.
    Ppn inst = instantiate(pre_t, r1.witness->valuation);
    Marking m = initial_marking(inst);
    for (const auto& t : r1.witness->firing_sequence) {
        auto next = fire(inst, m, t);
        REQUIRE(next);
        m = *next;
    }
    CHECK(m[inst.place_index("p1")] >= 1);

    // Parameters on output arcs: unbounded supplies decide.
    Ppn post_t = net("params b; place p1; trans t post {p1: b};");
    auto r2 = existential_coverable(post_t, {{"p1", 5}});
    CHECK(r2.verdict == Verdict::yes);
    REQUIRE(r2.witness);
    Ppn inst2 = instantiate(post_t, r2.witness->valuation);
    Marking m2 = initial_marking(inst2);
    for (const auto& t : r2.witness->firing_sequence) m2 = *fire(inst2, m2, t);
    CHECK(m2[inst2.place_index("p1")] >= 5);

    auto r2no = existential_coverable(net("params b; place p0; place p1;"
                                          "trans t pre {p0: 1} post {p1: b};"),
                                      {{"p1", 1}});
    CHECK(r2no.verdict == Verdict::no);

    // Same parameter on both sides of one place: only the bounded
    // enumeration remains, and it cannot conclude.
    Ppn general = net("params a; place p0; trans t pre {p0: a} post {p0: a};");
    auto r3 = existential_coverable(general, {{"p0", 1}});
    CHECK(r3.verdict == Verdict::unknown);
}

TEST_CASE("universal coverability dispatch") {
    // Output parameters: zero valuation is least permissive.
    Ppn post_t = net("params b; place p1; trans t post {p1: b}; trans u post {p1: 1};");
    CHECK(universal_coverable(post_t, {{"p1", 1}}).verdict == Verdict::yes);

    Ppn post_t_no = net("params b; place p1; trans t post {p1: b};");
    auto rno = universal_coverable(post_t_no, {{"p1", 1}});
    CHECK(rno.verdict == Verdict::no);
    REQUIRE(rno.witness);
    CHECK(rno.witness->valuation.at("b") == 0);

    // Input parameter starves the transition for large values.
    Ppn pre_t = net("params a; place p0 init 1; place p1; trans t pre {p0: a} post {p1: 1};");
    auto r2 = universal_coverable(pre_t, {{"p1", 1}});
    CHECK(r2.verdict == Verdict::no);
    REQUIRE(r2.witness);
    CHECK(r2.witness->valuation.at("a") >= 2);

    // No counterexample below the bound: stays unknown.
    Ppn safe = net("params a; place p0 init 9; place p1;"
                   "trans t pre {p0: a} post {p1: 1};");
    CHECK(universal_coverable(safe, {{"p1", 1}}, EnumLimits{5, 20000}).verdict ==
          Verdict::unknown);
}

TEST_CASE("bounded reachability on the loan") {
    Ppn loan = load_loan();
    std::map<std::string, std::uint64_t> v{{"a", 2}, {"b", 2}, {"c", 2},
                                           {"d", 2}, {"e", 2}, {"f", 2}};
    Ppn inst = instantiate(loan, v);

    Marking m0 = initial_marking(inst);
    auto self = bounded_reach(inst, m0, {});
    CHECK(self.verdict == ReachVerdict::yes);
    CHECK(self.firing_sequence.empty());

    // Reimbursements total c + f, so the bank recovers the loan and the
    // interest; replay the hand-built run and aim for its final marking.
    std::vector<std::string> run{"grantLoan", "reimburse", "reimburse",
                                 "endLoan",   "checkLoan", "checkInterest"};
    Marking target = m0;
    for (const auto& t : run) {
        auto next = fire(inst, target, t);
        REQUIRE(next);
        target = *next;
    }
    CHECK(target[inst.place_index("interestOk")] == 1);
    auto reach = bounded_reach(inst, target, {});
    CHECK(reach.verdict == ReachVerdict::yes);

    // The loan instance is bounded, so misses are definitive.
    auto miss = bounded_reach(inst, to_marking(inst, {{"loanOk", 3}}), {});
    CHECK(miss.verdict == ReachVerdict::no_within_bound);

    // Unbounded producer with an unreachable exact marking: unknown.
    Ppn producer = net("place p; place q init 1; trans t post {p: 1};");
    auto one = bounded_reach(producer, to_marking(producer, {{"p", 1}, {"q", 1}}),
                             ReachLimits{50, 200});
    CHECK(one.verdict == ReachVerdict::yes);
    auto beyond = bounded_reach(producer, to_marking(producer, {{"p", 60}, {"q", 1}}),
                                ReachLimits{50, 200});
    CHECK(beyond.verdict == ReachVerdict::unknown);
}

// ---------------------------------------------------------------------------
// Randomized properties
// ---------------------------------------------------------------------------

namespace {

Ppn random_parametric_net(std::mt19937& rng, bool params_on_inputs) {
    std::uniform_int_distribution<int> nplaces(2, 4), ntrans(2, 4), w(0, 2), coin(0, 1),
        init_tokens(0, 3);
    Ppn n;
    int np = nplaces(rng), nt = ntrans(rng);
    for (int i = 0; i < np; ++i) n.places.push_back("p" + std::to_string(i));
    n.params = {"a", "b"};
    for (int i = 0; i < np; ++i)
        if (coin(rng)) n.initial["p" + std::to_string(i)] = Weight::of(init_tokens(rng));
    for (int i = 0; i < nt; ++i) {
        std::string t = "t" + std::to_string(i);
        n.transitions.push_back(t);
        for (int p = 0; p < np; ++p) {
            std::string place = "p" + std::to_string(p);
            if (coin(rng)) {
                if (params_on_inputs && coin(rng) == 0)
                    n.pre[{place, t}] = Weight::of_param(coin(rng) ? "a" : "b");
                else
                    n.pre[{place, t}] = Weight::of(w(rng));
            }
            if (coin(rng)) {
                if (!params_on_inputs && coin(rng) == 0)
                    n.post[{place, t}] = Weight::of_param(coin(rng) ? "a" : "b");
                else
                    n.post[{place, t}] = Weight::of(w(rng));
            }
        }
    }
    return n;
}

std::map<std::string, std::uint64_t> random_valuation(std::mt19937& rng, const Ppn& n,
                                                      std::uint64_t lo, std::uint64_t hi) {
    std::map<std::string, std::uint64_t> v;
    std::uniform_int_distribution<std::uint64_t> pick(lo, hi);
    for (const auto& p : n.params) v[p] = pick(rng);
    return v;
}

std::vector<std::string> random_script(std::mt19937& rng, const Ppn& plain, int len) {
    std::vector<std::string> script;
    Marking m = initial_marking(plain);
    for (int i = 0; i < len; ++i) {
        std::vector<std::string> enabled;
        for (const auto& t : plain.transitions)
            if (fire(plain, m, t)) enabled.push_back(t);
        if (enabled.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
        const std::string& t = enabled[pick(rng)];
        m = *fire(plain, m, t);
        script.push_back(t);
    }
    return script;
}

}  // namespace

TEST_CASE("property: shrinking input weights preserves runs and dominates markings") {
    std::mt19937 rng(801);
    int done = 0, violations = 0;
    while (done < 120) {
        Ppn n = random_parametric_net(rng, true);
        if (!classify(n).is_pre_t) continue;
        auto v = random_valuation(rng, n, 1, 4);
        auto v_small = v;
        for (auto& [k, value] : v_small)
            value = std::uniform_int_distribution<std::uint64_t>(0, value)(rng);
        Ppn big = instantiate(n, v);
        Ppn small = instantiate(n, v_small);
        auto script = random_script(rng, big, 6);
        Marking mb = initial_marking(big), ms = initial_marking(small);
        for (const auto& t : script) {
            auto nb = fire(big, mb, t);
            auto ns = fire(small, ms, t);
            if (!nb) break;
            if (!ns) {
                ++violations;
                break;
            }
            mb = *nb;
            ms = *ns;
            for (std::size_t i = 0; i < mb.size(); ++i)
                if (ms[i] < mb[i]) ++violations;
        }
        ++done;
    }
    CHECK(done == 120);
    CHECK(violations == 0);
}

TEST_CASE("property: growing output weights preserves runs and dominates markings") {
    std::mt19937 rng(802);
    int done = 0, violations = 0;
    while (done < 120) {
        Ppn n = random_parametric_net(rng, false);
        if (!classify(n).is_post_t) continue;
        auto v = random_valuation(rng, n, 0, 3);
        auto v_big = v;
        for (auto& [k, value] : v_big)
            value += std::uniform_int_distribution<std::uint64_t>(0, 3)(rng);
        Ppn base = instantiate(n, v);
        Ppn more = instantiate(n, v_big);
        auto script = random_script(rng, base, 6);
        Marking m0 = initial_marking(base), m1 = initial_marking(more);
        for (const auto& t : script) {
            auto n0 = fire(base, m0, t);
            auto n1 = fire(more, m1, t);
            if (!n0) break;
            if (!n1) {
                ++violations;
                break;
            }
            m0 = *n0;
            m1 = *n1;
            for (std::size_t i = 0; i < m0.size(); ++i)
                if (m1[i] < m0[i]) ++violations;
        }
        ++done;
    }
    CHECK(done == 120);
    CHECK(violations == 0);
}

TEST_CASE("property: tree analysis agrees with exhaustive search on bounded nets") {
    std::mt19937 rng(803);
    int verified = 0, attempts = 0;
    while (verified < 60 && attempts < 4000) {
        ++attempts;
        Ppn n = random_parametric_net(rng, std::uniform_int_distribution<int>(0, 1)(rng) == 0);
        Ppn plain = instantiate(n, random_valuation(rng, n, 0, 2));
        // Exhaustive search under a 50-token cap; skip if the cap is hit.
        std::set<Marking> seen{initial_marking(plain)};
        std::vector<Marking> frontier{initial_marking(plain)};
        bool capped = false;
        while (!frontier.empty() && !capped && seen.size() < 6000) {
            Marking m = frontier.back();
            frontier.pop_back();
            for (const auto& t : plain.transitions) {
                auto next = fire(plain, m, t);
                if (!next) continue;
                for (auto count : *next)
                    if (count > 50) capped = true;
                if (capped) break;
                if (seen.insert(*next).second) frontier.push_back(*next);
            }
        }
        if (capped || seen.size() >= 6000) continue;

        KmTree tree = km_analyze(plain);
        REQUIRE(tree.bounded);
        // Identical per-place maxima.
        Marking max_seen(plain.places.size(), 0);
        for (const auto& m : seen)
            for (std::size_t i = 0; i < m.size(); ++i) max_seen[i] = std::max(max_seen[i], m[i]);
        Marking max_tree(plain.places.size(), 0);
        for (const auto& node : tree.nodes)
            for (std::size_t i = 0; i < node.marking.size(); ++i) {
                REQUIRE_FALSE(node.marking[i].omega);
                max_tree[i] = std::max(max_tree[i], node.marking[i].n);
            }
        REQUIRE(max_seen == max_tree);

        // Coverability agrees with a domination scan over the search space.
        std::uniform_int_distribution<std::uint64_t> demand(0, 3);
        std::map<std::string, std::uint64_t> want;
        for (const auto& p : plain.places)
            if (demand(rng) == 0) want[p] = demand(rng) + 1;
        Marking target = to_marking(plain, want);
        bool dominated = false;
        for (const auto& m : seen) {
            bool ge = true;
            for (std::size_t i = 0; i < m.size(); ++i) ge &= m[i] >= target[i];
            dominated |= ge;
        }
        REQUIRE(coverable(plain, target) == dominated);
        ++verified;
    }
    CHECK(verified == 60);
}

TEST_CASE("property: existential yes-answers replay their witnesses") {
    std::mt19937 rng(804);
    int yes_cases = 0, done = 0;
    while (done < 80) {
        bool on_inputs = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
        Ppn n = random_parametric_net(rng, on_inputs);
        std::uniform_int_distribution<std::uint64_t> demand(1, 2);
        std::map<std::string, std::uint64_t> target{{n.places[0], demand(rng)}};
        auto res = existential_coverable(n, target, EnumLimits{3, 5000});
        if (res.verdict == Verdict::yes) {
            REQUIRE(res.witness);
            Ppn inst = instantiate(n, res.witness->valuation);
            Marking m = initial_marking(inst);
            for (const auto& t : res.witness->firing_sequence) {
                auto next = fire(inst, m, t);
                REQUIRE(next);
                m = *next;
            }
            Marking want = to_marking(inst, target);
            for (std::size_t i = 0; i < m.size(); ++i) REQUIRE(m[i] >= want[i]);
            ++yes_cases;
        }
        ++done;
    }
    CHECK(yes_cases > 10);
}
