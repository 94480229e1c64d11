#include "difbench/text.hpp"

#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <cctype>
#include <vector>

namespace difbench {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

static std::string nfc(const std::string& in) {
    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* norm = unorm2_getNFCInstance(&status);
    if (U_FAILURE(status)) return in;

    // UTF-8 -> UTF-16
    std::vector<UChar> u16(in.size() + 1);
    int32_t u16len = 0;
    u_strFromUTF8(u16.data(), static_cast<int32_t>(u16.size()), &u16len, in.data(),
                  static_cast<int32_t>(in.size()), &status);
    if (U_FAILURE(status)) return in;  // invalid UTF-8 is left as-is

    std::vector<UChar> out(static_cast<std::size_t>(u16len) * 2 + 16);
    int32_t outlen = unorm2_normalize(norm, u16.data(), u16len, out.data(),
                                      static_cast<int32_t>(out.size()), &status);
    if (U_FAILURE(status)) return in;

    std::vector<char> u8(static_cast<std::size_t>(outlen) * 4 + 4);
    int32_t u8len = 0;
    u_strToUTF8(u8.data(), static_cast<int32_t>(u8.size()), &u8len, out.data(), outlen, &status);
    if (U_FAILURE(status)) return in;
    return std::string(u8.data(), static_cast<std::size_t>(u8len));
}

std::string normalize_feature(const std::string& s) { return nfc(trim(s)); }

std::size_t approximate_token_count(const std::string& s) {
    // ~4 bytes per token, the usual rule of thumb for English text
    return (s.size() + 3) / 4;
}

}  // namespace difbench
