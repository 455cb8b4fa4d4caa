#include "paraverse/linear.hpp"

namespace paraverse {

bool context_has(const VarContext& ctx, const std::string& name) {
    return context_find(ctx, name) != nullptr;
}

const Var* context_find(const VarContext& ctx, const std::string& name) {
    for (const auto& v : ctx)
        if (v.name == name) return &v;
    return nullptr;
}

LinearTerm LinearTerm::of_constant(Rational c) {
    LinearTerm t;
    t.constant = std::move(c);
    return t;
}

LinearTerm LinearTerm::of_var(const std::string& name, Integer coeff) {
    LinearTerm t;
    t.add_var(name, coeff);
    return t;
}

void LinearTerm::add_var(const std::string& name, const Integer& coeff) {
    if (coeff == 0) return;
    auto it = coeffs.find(name);
    if (it == coeffs.end()) {
        coeffs.emplace(name, coeff);
        return;
    }
    it->second += coeff;
    if (it->second == 0) coeffs.erase(it);
}

Integer LinearTerm::coeff_of(const std::string& name) const {
    auto it = coeffs.find(name);
    return it == coeffs.end() ? Integer(0) : it->second;
}

LinearTerm& LinearTerm::operator+=(const LinearTerm& o) {
    for (const auto& [name, c] : o.coeffs) add_var(name, c);
    constant += o.constant;
    return *this;
}

LinearTerm& LinearTerm::operator-=(const LinearTerm& o) {
    for (const auto& [name, c] : o.coeffs) add_var(name, -c);
    constant -= o.constant;
    return *this;
}

LinearTerm LinearTerm::scaled(const Integer& k) const {
    LinearTerm out;
    if (k == 0) return out;
    for (const auto& [name, c] : coeffs) out.coeffs.emplace(name, c * k);
    out.constant = constant * Rational(k);
    return out;
}

LinearTerm LinearTerm::negated() const {
    return scaled(-1);
}

const Rational& Valuation::at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw missing_variable_error(name);
    return it->second;
}

Rational Valuation::eval(const LinearTerm& t) const {
    Rational acc = t.constant;
    for (const auto& [name, c] : t.coeffs) acc += Rational(c) * at(name);
    return acc;
}

}  // namespace paraverse
