#include "paraverse/rational.hpp"

#include <cctype>

namespace paraverse {

std::string rat_to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::optional<Rational> rat_parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t pos = 0;
    bool neg = false;
    if (text[pos] == '-' || text[pos] == '+') {
        neg = text[pos] == '-';
        ++pos;
    }
    auto digits = [&](std::string& out) {
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) out += text[pos++];
        return !out.empty();
    };
    std::string ipart;
    if (!digits(ipart)) return std::nullopt;
    Rational value;
    if (pos < text.size() && text[pos] == '/') {
        ++pos;
        std::string den;
        if (!digits(den) || pos != text.size()) return std::nullopt;
        Integer d(den);
        if (d == 0) return std::nullopt;
        value = Rational(Integer(ipart), d);
    } else if (pos < text.size() && text[pos] == '.') {
        ++pos;
        std::string frac;
        if (!digits(frac) || pos != text.size()) return std::nullopt;
        Integer scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        value = Rational(Integer(ipart) * scale + Integer(frac), scale);
    } else {
        if (pos != text.size()) return std::nullopt;
        value = Rational(Integer(ipart));
    }
    value.canonicalize();
    if (neg) value = -value;
    return value;
}

Integer rat_floor(const Rational& q) {
    Integer out;
    mpz_fdiv_q(out.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return out;
}

Integer rat_ceil(const Rational& q) {
    Integer out;
    mpz_cdiv_q(out.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return out;
}

}  // namespace paraverse
