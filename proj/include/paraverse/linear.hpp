#pragma once

#include "paraverse/rational.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace paraverse {

enum class VarKind { clock, parameter, aux };

struct Var {
    std::string name;
    VarKind kind = VarKind::aux;

    bool operator==(const Var& o) const { return name == o.name && kind == o.kind; }
    bool operator!=(const Var& o) const { return !(*this == o); }
};

// Ordered list of distinct variables; all terms and constraints are read
// relative to one of these.
using VarContext = std::vector<Var>;

bool context_has(const VarContext& ctx, const std::string& name);
const Var* context_find(const VarContext& ctx, const std::string& name);

struct missing_variable_error : std::runtime_error {
    explicit missing_variable_error(const std::string& name)
        : std::runtime_error("no value for variable '" + name + "'") {}
};

struct context_mismatch_error : std::runtime_error {
    context_mismatch_error() : std::runtime_error("variable contexts differ") {}
};

// Sum of integer-coefficient variables plus a rational constant.
// Zero coefficients are never stored.
struct LinearTerm {
    std::map<std::string, Integer> coeffs;
    Rational constant = 0;

    static LinearTerm of_constant(Rational c);
    static LinearTerm of_var(const std::string& name, Integer coeff = 1);

    void add_var(const std::string& name, const Integer& coeff);
    bool is_constant() const { return coeffs.empty(); }
    Integer coeff_of(const std::string& name) const;

    LinearTerm& operator+=(const LinearTerm& o);
    LinearTerm& operator-=(const LinearTerm& o);
    LinearTerm scaled(const Integer& k) const;
    LinearTerm negated() const;

    bool operator==(const LinearTerm& o) const {
        return coeffs == o.coeffs && constant == o.constant;
    }
};

// Total assignment of rationals to variables, keyed by name.
struct Valuation {
    std::map<std::string, Rational> values;

    bool has(const std::string& name) const { return values.count(name) != 0; }
    const Rational& at(const std::string& name) const;
    void set(const std::string& name, Rational v) { values[name] = std::move(v); }

    Rational eval(const LinearTerm& t) const;
};

}  // namespace paraverse
