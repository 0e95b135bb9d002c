#include "tractdyn/rational.hpp"

#include "tractdyn/error.hpp"

#include <cctype>

namespace tractdyn {

namespace {

bool is_integer_text(std::string_view text) {
    std::size_t start = (!text.empty() && (text[0] == '-' || text[0] == '+')) ? 1 : 0;
    if (start == text.size()) {
        return false;
    }
    for (std::size_t i = start; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            return false;
        }
    }
    return true;
}

mpz_class parse_integer(std::string_view text) {
    if (!is_integer_text(text)) {
        throw ValidationError("not an integer: '" + std::string(text) + "'");
    }
    std::string digits(text);
    if (digits[0] == '+') {
        digits.erase(0, 1);
    }
    return mpz_class(digits, 10);
}

} // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.remove_suffix(1);
    }
    if (text.empty()) {
        throw ValidationError("empty rational");
    }
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const mpz_class num = parse_integer(text.substr(0, slash));
        const mpz_class den = parse_integer(text.substr(slash + 1));
        if (den == 0) {
            throw ValidationError("zero denominator in '" + std::string(text) + "'");
        }
        Rational r(num, den);
        r.canonicalize();
        return r;
    }
    if (const auto dot = text.find('.'); dot != std::string_view::npos) {
        const std::string_view whole = text.substr(0, dot);
        const std::string_view frac = text.substr(dot + 1);
        const bool negative = !whole.empty() && whole[0] == '-';
        const std::string_view whole_digits =
            (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) ? whole.substr(1) : whole;
        if ((whole_digits.empty() && frac.empty()) ||
            (!whole_digits.empty() && !is_integer_text(whole_digits)) ||
            (!frac.empty() && !is_integer_text(frac)) || (!frac.empty() && !std::isdigit(frac[0]))) {
            throw ValidationError("not a rational: '" + std::string(text) + "'");
        }
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
        const mpz_class w = whole_digits.empty() ? mpz_class(0) : parse_integer(whole_digits);
        const mpz_class f = frac.empty() ? mpz_class(0) : parse_integer(frac);
        Rational r(w * scale + f, scale);
        r.canonicalize();
        return negative ? Rational(-r) : r;
    }
    return Rational(parse_integer(text));
}

std::string format_rational(const Rational &value) {
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

} // namespace tractdyn
