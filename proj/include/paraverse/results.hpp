#pragma once

#include "paraverse/constraint.hpp"
#include "paraverse/mts.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace paraverse::io {

// The four result shapes the engines produce. Serialized as deterministic,
// schema-versioned JSON; rationals travel as "num/den" strings.
struct Result {
    enum class Kind { constraint_set, verdict, valuation_fun, km_summary };
    Kind kind = Kind::verdict;

    // constraint_set
    std::optional<ConstraintSet> cset;
    bool complete = true;

    // verdict ("yes" | "no" | "unknown" | "true" | "false") plus free-form
    // witness details, both strings.
    std::string verdict;
    std::vector<std::pair<std::string, std::string>> details;

    // valuation_fun
    std::vector<std::string> vf_vars;
    std::vector<std::pair<std::string, std::vector<mts::ParamValuation>>> vf_states;
    std::vector<mts::ParamValuation> vf_minimal;

    // km_summary
    bool km_bounded = false;
    std::size_t km_nodes = 0;
    std::vector<std::set<std::string>> km_unbounded_sets;
};

Result result_of(ConstraintSet set, bool complete);
Result result_verdict(std::string verdict,
                      std::vector<std::pair<std::string, std::string>> details = {});

std::string emit_result(const Result& r);
Result read_result(const std::string& json_text);

// Human-readable rendering for the text output mode.
std::string render_text(const Result& r);

}  // namespace paraverse::io
