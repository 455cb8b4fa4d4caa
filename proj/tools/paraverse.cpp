#include "CLI11.hpp"

#include "paraverse/parse.hpp"
#include "paraverse/results.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace paraverse;

namespace {

// Exit codes: 0 definite answer, 1 definite negative on yes/no queries,
// 2 unknown or limits hit, 3 input error, 4 internal error.
enum ExitCode { exit_ok = 0, exit_negative = 1, exit_unknown = 2, exit_input = 3, exit_internal = 4 };

struct Limits {
    std::size_t max_states = 100000;
    std::size_t max_depth = 1000;
    std::uint64_t token_cap = 200;
    std::uint64_t valuation_bound = 5;
    long int_bound = 32;
};

void apply_limits(Limits& l, const std::string& text) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("limits entries look like key=value: '" + item + "'");
        std::string key = item.substr(0, eq);
        unsigned long long value = std::stoull(item.substr(eq + 1));
        if (key == "maxStates") l.max_states = value;
        else if (key == "maxDepth") l.max_depth = value;
        else if (key == "tokenCap") l.token_cap = value;
        else if (key == "valuationBound") l.valuation_bound = value;
        else if (key == "intBound") l.int_bound = static_cast<long>(value);
        else throw std::runtime_error("unknown limit '" + key + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

struct Output {
    std::string json_path;  // empty = no JSON
    std::string text_path;  // empty = stdout
};

// Results go to the output stream only for definite answers (exit 0 or 1);
// everything else stays on stderr.
int finish(const io::Result& r, int code, const Output& out) {
    if (code != exit_ok && code != exit_negative) {
        std::cerr << io::render_text(r);
        return code;
    }
    if (!out.json_path.empty()) {
        std::ofstream j(out.json_path);
        if (!j) throw std::runtime_error("cannot write '" + out.json_path + "'");
        j << io::emit_result(r);
    }
    if (!out.text_path.empty()) {
        std::ofstream t(out.text_path);
        if (!t) throw std::runtime_error("cannot write '" + out.text_path + "'");
        t << io::render_text(r);
    } else {
        std::cout << io::render_text(r);
    }
    return code;
}

int run_pta(const std::string& model_text, const std::string& model_path,
            const std::string& query, const Limits& limits, const Output& out) {
    pta::Pta model = io::parse_pta(model_text, model_path);
    io::PtaQuery q = io::parse_pta_query(query, model);
    pta::ExploreLimits explore{limits.max_states, limits.max_depth};
    switch (q.kind) {
        case io::PtaQuery::Kind::ef_synth: {
            auto res = pta::ef_synthesis(model, q.targets, explore);
            return finish(io::result_of(res.constraints, res.complete),
                          res.complete ? exit_ok : exit_unknown, out);
        }
        case io::PtaQuery::Kind::reach: {
            pta::Pta inst = model;
            if (q.at) inst = pta::instantiate(model, *q.at);
            else if (!model.params.empty())
                throw std::runtime_error("reach on a parametric model needs 'at (...)'");
            bool hit = pta::concrete_reach(inst, q.targets);
            return finish(io::result_verdict(hit ? "yes" : "no"), hit ? exit_ok : exit_negative,
                          out);
        }
        case io::PtaQuery::Kind::lu_emptiness: {
            bool empty = pta::lu_ef_emptiness(model, q.targets);
            return finish(io::result_verdict(empty ? "yes" : "no"),
                          empty ? exit_ok : exit_negative, out);
        }
        case io::PtaQuery::Kind::ip_check: {
            auto res = pta::ip_check(model, explore, limits.int_bound);
            if (res.verdict == Ternary::yes) return finish(io::result_verdict("yes"), exit_ok, out);
            if (res.verdict == Ternary::no)
                return finish(io::result_verdict("no", {{"state", res.witness->location},
                                                        {"zone", to_string(res.witness->zone)}}),
                              exit_negative, out);
            return finish(io::result_verdict("unknown"), exit_unknown, out);
        }
        case io::PtaQuery::Kind::classify_lu: {
            auto lu = pta::classify_lu(model);
            if (!lu.is_lu) return finish(io::result_verdict("notLU"), exit_ok, out);
            auto join = [](const std::set<std::string>& s) {
                std::string r;
                for (const auto& x : s) r += (r.empty() ? "" : " ") + x;
                return r;
            };
            std::string shape = lu.l_only() ? "L-only" : lu.u_only() ? "U-only" : "LU";
            return finish(io::result_verdict(shape, {{"lower", join(lu.lower)},
                                                     {"upper", join(lu.upper)}}),
                          exit_ok, out);
        }
        case io::PtaQuery::Kind::ec_check: {
            pta::Pta inst = model;
            if (q.at) inst = pta::instantiate(model, *q.at);
            else if (!model.params.empty())
                throw std::runtime_error("ec-check on a parametric model needs 'at (...)'");
            auto v = pta::ec_check(inst);
            if (v == pta::EcVerdict::yes) return finish(io::result_verdict("yes"), exit_ok, out);
            return finish(io::result_verdict("unknown"), exit_unknown, out);
        }
    }
    return exit_internal;
}

int run_pimc(const std::string& model_text, const std::string& model_path,
             const std::string& query, const Output& out) {
    pimc::Pimc model = io::parse_pimc(model_text, model_path);
    io::PimcQuery q = io::parse_pimc_query(query, model);
    if (q.kind == io::PimcQuery::Kind::consistency_synth) {
        ConstraintSet set = pimc::synthesize_consistency(model);
        return finish(io::result_of(std::move(set), true), exit_ok, out);
    }
    pimc::Pimc inst = pimc::instantiate(model, q.at);
    auto [ok, witness] = pimc::is_consistent(inst);
    if (!ok) return finish(io::result_verdict("no"), exit_negative, out);
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& s : witness->states) {
        std::string row;
        for (const auto& t : witness->states) {
            Rational p = witness->prob(s, t);
            if (p != 0) row += (row.empty() ? "" : ", ") + t + ": " + rat_to_string(p);
        }
        rows.emplace_back(s, row);
    }
    return finish(io::result_verdict("yes", rows), exit_ok, out);
}

int run_mts(const std::string& model_text, const std::string& model_path,
            const std::string& query, const Output& out) {
    mts::Mts model = io::parse_mts(model_text, model_path);
    mts::FormulaPtr phi = io::parse_formula(query, model);
    mts::StateValFun f = mts::synthesize(model, phi);
    io::Result r;
    r.kind = io::Result::Kind::valuation_fun;
    r.vf_vars = model.vars;
    for (std::size_t s = 0; s < model.states.size(); ++s) {
        std::vector<mts::ParamValuation> vals;
        for (auto v : f[s].values()) vals.push_back(mts::unpack(model, v));
        r.vf_states.emplace_back(model.states[s], std::move(vals));
    }
    r.vf_minimal = mts::minimal_valuations(model, f[model.state_index(model.initial)]);
    return finish(r, exit_ok, out);
}

int run_ppn(const std::string& model_text, const std::string& model_path,
            const std::string& query, const Limits& limits, const Output& out) {
    ppn::Ppn model = io::parse_ppn(model_text, model_path);
    io::PpnQuery q = io::parse_ppn_query(query, model);
    ppn::EnumLimits enum_limits{limits.valuation_bound, limits.max_states};

    auto instantiated = [&]() {
        if (q.mode == io::PpnQuery::Mode::at) return ppn::instantiate(model, q.valuation);
        if (!model.params.empty())
            throw std::runtime_error("query needs 'at (...)' on a parametric net");
        return model;
    };

    switch (q.kind) {
        case io::PpnQuery::Kind::cover: {
            if (q.mode == io::PpnQuery::Mode::exists || q.mode == io::PpnQuery::Mode::forall) {
                ppn::CoverResult res =
                    q.mode == io::PpnQuery::Mode::exists
                        ? ppn::existential_coverable(model, q.marking, enum_limits)
                        : ppn::universal_coverable(model, q.marking, enum_limits);
                if (res.verdict == ppn::Verdict::unknown)
                    return finish(io::result_verdict("unknown"), exit_unknown, out);
                std::vector<std::pair<std::string, std::string>> details;
                if (res.witness) {
                    std::string v;
                    for (const auto& [k, n] : res.witness->valuation)
                        v += (v.empty() ? "" : ", ") + k + " = " + std::to_string(n);
                    details.emplace_back("valuation", v);
                    std::string seq;
                    for (const auto& t : res.witness->firing_sequence)
                        seq += (seq.empty() ? "" : " ") + t;
                    if (!seq.empty()) details.emplace_back("run", seq);
                }
                bool yes = res.verdict == ppn::Verdict::yes;
                return finish(io::result_verdict(yes ? "yes" : "no", details),
                              yes ? exit_ok : exit_negative, out);
            }
            ppn::Ppn inst = instantiated();
            bool yes = ppn::coverable(inst, ppn::to_marking(inst, q.marking));
            return finish(io::result_verdict(yes ? "yes" : "no"), yes ? exit_ok : exit_negative,
                          out);
        }
        case io::PpnQuery::Kind::reach: {
            ppn::Ppn inst = instantiated();
            auto res = ppn::bounded_reach(inst, ppn::to_marking(inst, q.marking),
                                          ppn::ReachLimits{limits.token_cap, limits.max_states});
            if (res.verdict == ppn::ReachVerdict::yes) {
                std::string seq;
                for (const auto& t : res.firing_sequence) seq += (seq.empty() ? "" : " ") + t;
                return finish(io::result_verdict("yes", {{"run", seq}}), exit_ok, out);
            }
            if (res.verdict == ppn::ReachVerdict::no_within_bound)
                return finish(io::result_verdict("no"), exit_negative, out);
            return finish(io::result_verdict("unknown"), exit_unknown, out);
        }
        case io::PpnQuery::Kind::bounded: {
            ppn::Ppn inst = instantiated();
            ppn::KmTree tree = ppn::km_analyze(inst);
            io::Result r;
            r.kind = io::Result::Kind::km_summary;
            r.km_bounded = tree.bounded;
            r.km_nodes = tree.nodes.size();
            r.km_unbounded_sets = tree.unbounded_place_sets;
            return finish(r, tree.bounded ? exit_ok : exit_negative, out);
        }
        case io::PpnQuery::Kind::simultaneous: {
            ppn::Ppn inst = instantiated();
            ppn::KmTree tree = ppn::km_analyze(inst);
            bool yes = false;
            for (const auto& s : tree.unbounded_place_sets)
                yes |= std::includes(s.begin(), s.end(), q.places.begin(), q.places.end());
            return finish(io::result_verdict(yes ? "yes" : "no"), yes ? exit_ok : exit_negative,
                          out);
        }
    }
    return exit_internal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "paraverse: parameter synthesis workbench for timed automata, interval\n"
        "Markov chains, Petri nets with parametric arc weights, and\n"
        "action-set synthesis.\n\n"
        "Exit codes: 0 definite answer, 1 definite negative, 2 unknown or\n"
        "limits reached, 3 input error, 4 internal error."};
    app.require_subcommand(1);

    std::string model_path, query, query_file, limits_text, json_path, text_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("model", model_path, "model file")->required();
        sub->add_option("--query", query, "query text (see README)");
        sub->add_option("--query-file", query_file, "file holding the query text");
        sub->add_option("--limits", limits_text,
                        "comma-separated overrides: maxStates, maxDepth, tokenCap, "
                        "valuationBound, intBound (defaults 100000, 1000, 200, 5, 32); the "
                        "PARAVERSE_LIMITS environment variable is applied first");
        sub->add_option("--json", json_path, "write the result as JSON to this file");
        sub->add_option("--output", text_path, "write the text result here instead of stdout");
    };
    CLI::App* pta_cmd = app.add_subcommand("pta", "parametric timed automata");
    CLI::App* pimc_cmd = app.add_subcommand("pimc", "parametric interval Markov chains");
    CLI::App* mts_cmd = app.add_subcommand("mts", "action synthesis on mixed transition systems");
    CLI::App* ppn_cmd = app.add_subcommand("ppn", "Petri nets with parametric weights");
    for (auto* sub : {pta_cmd, pimc_cmd, mts_cmd, ppn_cmd}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        Limits limits;
        if (const char* env = std::getenv("PARAVERSE_LIMITS")) apply_limits(limits, env);
        if (!limits_text.empty()) apply_limits(limits, limits_text);
        Output out{json_path, text_path};

        if (!query_file.empty()) {
            if (!query.empty()) throw std::runtime_error("--query and --query-file both given");
            query = read_file(query_file);
        }
        if (query.empty()) throw std::runtime_error("no query given (use --query)");
        std::string model_text = read_file(model_path);

        if (app.got_subcommand(pta_cmd)) return run_pta(model_text, model_path, query, limits, out);
        if (app.got_subcommand(pimc_cmd)) return run_pimc(model_text, model_path, query, out);
        if (app.got_subcommand(mts_cmd)) return run_mts(model_text, model_path, query, out);
        if (app.got_subcommand(ppn_cmd)) return run_ppn(model_text, model_path, query, limits, out);
        return exit_input;
    } catch (const io::ParseError& e) {
        std::cerr << "error: " << io::format_error(e) << "\n";
        return exit_input;
    } catch (const io::semantic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
}
