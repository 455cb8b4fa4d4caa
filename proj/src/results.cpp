#include "paraverse/results.hpp"

#include "json.hpp"

#include <algorithm>
#include <sstream>

namespace paraverse::io {

using json = nlohmann::ordered_json;

namespace {

const char* schema_tag = "paraverse/1";

std::string kind_name(VarKind k) {
    switch (k) {
        case VarKind::clock: return "clock";
        case VarKind::parameter: return "parameter";
        case VarKind::aux: return "aux";
    }
    return "aux";
}

VarKind kind_of(const std::string& s) {
    if (s == "clock") return VarKind::clock;
    if (s == "parameter") return VarKind::parameter;
    return VarKind::aux;
}

json json_of(const ConstraintSet& set) {
    json ctx = json::array();
    for (const auto& v : set.context) ctx.push_back({{"name", v.name}, {"kind", kind_name(v.kind)}});
    json disjuncts = json::array();
    for (const auto& d : set.disjuncts) {
        json atoms = json::array();
        for (const auto& a : d.atoms) {
            json term = json::object();
            for (const auto& v : set.context) {
                Integer c = a.term.coeff_of(v.name);
                if (c != 0) term[v.name] = static_cast<long>(c.get_si());
            }
            atoms.push_back({{"term", std::move(term)},
                             {"const", rat_to_string(a.term.constant)},
                             {"rel", a.strict ? "<" : "<="}});
        }
        disjuncts.push_back(std::move(atoms));
    }
    return json{{"context", std::move(ctx)}, {"disjuncts", std::move(disjuncts)}};
}

ConstraintSet cset_of(const json& j) {
    VarContext ctx;
    for (const auto& v : j.at("context"))
        ctx.push_back(Var{v.at("name").get<std::string>(), kind_of(v.at("kind").get<std::string>())});
    ConstraintSet out = ConstraintSet::empty(ctx);
    for (const auto& dj : j.at("disjuncts")) {
        ConvexConstraint c = ConvexConstraint::top(ctx);
        for (const auto& aj : dj) {
            LinearTerm t;
            for (const auto& [name, coeff] : aj.at("term").items())
                t.add_var(name, Integer(coeff.get<long>()));
            auto q = rat_parse(aj.at("const").get<std::string>());
            if (!q) throw std::runtime_error("malformed rational in result");
            t.constant = *q;
            std::string rel = aj.at("rel").get<std::string>();
            c.add(t, rel == "<" ? Rel::lt : rel == "=" ? Rel::eq : Rel::le);
        }
        out.disjuncts.push_back(std::move(c));  // no pruning: faithful reload
    }
    return out;
}

json json_of(const std::vector<mts::ParamValuation>& vals) {
    json out = json::array();
    for (const auto& v : vals) {
        json one = json::object();
        for (const auto& [var, acts] : v.assignment) {
            json list = json::array();
            for (const auto& a : acts) list.push_back(a);
            one[var] = std::move(list);
        }
        out.push_back(std::move(one));
    }
    return out;
}

std::vector<mts::ParamValuation> valuations_of(const json& j) {
    std::vector<mts::ParamValuation> out;
    for (const auto& vj : j) {
        mts::ParamValuation v;
        for (const auto& [var, acts] : vj.items()) {
            std::set<std::string> s;
            for (const auto& a : acts) s.insert(a.get<std::string>());
            v.assignment[var] = std::move(s);
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

Result result_of(ConstraintSet set, bool complete) {
    Result r;
    r.kind = Result::Kind::constraint_set;
    r.cset = std::move(set);
    r.complete = complete;
    return r;
}

Result result_verdict(std::string verdict, std::vector<std::pair<std::string, std::string>> details) {
    Result r;
    r.kind = Result::Kind::verdict;
    r.verdict = std::move(verdict);
    r.details = std::move(details);
    return r;
}

std::string emit_result(const Result& r) {
    json j;
    j["schema"] = schema_tag;
    switch (r.kind) {
        case Result::Kind::constraint_set: {
            j["kind"] = "constraint-set";
            j["complete"] = r.complete;
            json body = json_of(*r.cset);
            j["context"] = std::move(body["context"]);
            j["disjuncts"] = std::move(body["disjuncts"]);
            break;
        }
        case Result::Kind::verdict: {
            j["kind"] = "verdict";
            j["verdict"] = r.verdict;
            if (!r.details.empty()) {
                json d = json::object();
                for (const auto& [k, v] : r.details) d[k] = v;
                j["details"] = std::move(d);
            }
            break;
        }
        case Result::Kind::valuation_fun: {
            j["kind"] = "valuation-fun";
            j["vars"] = r.vf_vars;
            json states = json::object();
            for (const auto& [s, vals] : r.vf_states) states[s] = json_of(vals);
            j["states"] = std::move(states);
            j["minimal"] = json_of(r.vf_minimal);
            break;
        }
        case Result::Kind::km_summary: {
            j["kind"] = "km-summary";
            j["bounded"] = r.km_bounded;
            j["nodes"] = r.km_nodes;
            json sets = json::array();
            for (const auto& s : r.km_unbounded_sets) {
                json one = json::array();
                for (const auto& p : s) one.push_back(p);
                sets.push_back(std::move(one));
            }
            j["unbounded-place-sets"] = std::move(sets);
            break;
        }
    }
    return j.dump(2) + "\n";
}

Result read_result(const std::string& text) {
    json j = json::parse(text);
    if (j.at("schema").get<std::string>() != schema_tag)
        throw std::runtime_error("unsupported result schema");
    Result r;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "constraint-set") {
        r.kind = Result::Kind::constraint_set;
        r.complete = j.at("complete").get<bool>();
        r.cset = cset_of(j);
    } else if (kind == "verdict") {
        r.kind = Result::Kind::verdict;
        r.verdict = j.at("verdict").get<std::string>();
        if (j.contains("details"))
            for (const auto& [k, v] : j.at("details").items())
                r.details.emplace_back(k, v.get<std::string>());
    } else if (kind == "valuation-fun") {
        r.kind = Result::Kind::valuation_fun;
        r.vf_vars = j.at("vars").get<std::vector<std::string>>();
        for (const auto& [s, vals] : j.at("states").items())
            r.vf_states.emplace_back(s, valuations_of(vals));
        r.vf_minimal = valuations_of(j.at("minimal"));
    } else if (kind == "km-summary") {
        r.kind = Result::Kind::km_summary;
        r.km_bounded = j.at("bounded").get<bool>();
        r.km_nodes = j.at("nodes").get<std::size_t>();
        for (const auto& sj : j.at("unbounded-place-sets")) {
            std::set<std::string> s;
            for (const auto& p : sj) s.insert(p.get<std::string>());
            r.km_unbounded_sets.push_back(std::move(s));
        }
    } else {
        throw std::runtime_error("unknown result kind '" + kind + "'");
    }
    return r;
}

std::string render_text(const Result& r) {
    std::ostringstream oss;
    switch (r.kind) {
        case Result::Kind::constraint_set:
            oss << to_string(*r.cset) << "\n";
            if (!r.complete) oss << "(exploration incomplete: limits reached)\n";
            break;
        case Result::Kind::verdict:
            oss << r.verdict << "\n";
            for (const auto& [k, v] : r.details) oss << "  " << k << ": " << v << "\n";
            break;
        case Result::Kind::valuation_fun:
            for (const auto& [s, vals] : r.vf_states) {
                oss << s << ": " << vals.size() << " valuation(s)\n";
                for (const auto& v : vals) {
                    oss << "  {";
                    bool firstv = true;
                    for (const auto& [var, acts] : v.assignment) {
                        if (!firstv) oss << "; ";
                        oss << var << " = {";
                        bool first = true;
                        for (const auto& a : acts) {
                            if (!first) oss << ",";
                            oss << a;
                            first = false;
                        }
                        oss << "}";
                        firstv = false;
                    }
                    oss << "}\n";
                }
            }
            oss << "minimal valuations: " << r.vf_minimal.size() << "\n";
            break;
        case Result::Kind::km_summary:
            oss << (r.km_bounded ? "bounded" : "unbounded") << " (" << r.km_nodes << " nodes)\n";
            for (const auto& s : r.km_unbounded_sets) {
                oss << "  unbounded together: {";
                bool first = true;
                for (const auto& p : s) {
                    if (!first) oss << ", ";
                    oss << p;
                    first = false;
                }
                oss << "}\n";
            }
            break;
    }
    return oss.str();
}

}  // namespace paraverse::io
