#include "difbench/fraction.hpp"

#include <cctype>

namespace difbench {

Fraction Fraction::parse(const std::string& raw) {
    std::string s = raw;
    // trim
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) throw std::invalid_argument("Fraction: empty string");

    bool percent = false;
    if (s.back() == '%') {
        percent = true;
        s.pop_back();
    }

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::int64_t p = std::stoll(s.substr(0, slash));
        std::int64_t q = std::stoll(s.substr(slash + 1));
        Fraction f(p, q);
        if (percent) return Fraction(f.num, f.den * 100);
        return f;
    }

    // decimal: digits with optional single '.'
    auto dot = s.find('.');
    std::int64_t den = 1;
    std::string digits;
    if (dot == std::string::npos) {
        digits = s;
    } else {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    }
    if (digits.empty()) throw std::invalid_argument("Fraction: malformed number: " + raw);
    for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("Fraction: malformed number: " + raw);
    std::int64_t num = std::stoll(digits);
    if (percent) den *= 100;
    return Fraction(num, den);
}

}  // namespace difbench
