#pragma once
// Exact rational fraction for the distinctiveness threshold.
// Keeping theta rational means floor(n * theta) has no floating-point
// boundary error (2.5% of 40 must be exactly 1).

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace difbench {

struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction() = default;
    Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den <= 0) throw std::invalid_argument("Fraction: denominator must be positive");
        reduce();
    }

    // floor(x * num / den) for non-negative x
    std::int64_t floor_mul(std::int64_t x) const { return x * num / den; }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }

    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

    // Accepts "p/q", decimal like "0.05", and percent like "2.5%".
    static Fraction parse(const std::string& s);

private:
    void reduce() {
        if (num == 0) { den = 1; return; }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        num /= g;
        den /= g;
    }
};

}  // namespace difbench
