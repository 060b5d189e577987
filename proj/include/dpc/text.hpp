#ifndef DPC_TEXT_HPP
#define DPC_TEXT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dpc {

/// Decodes UTF-8 into codepoints. Invalid bytes decode as their raw value,
/// which keeps offsets meaningful for error reporting on binary-ish input.
inline std::vector<std::int32_t> decode_utf8(const std::string& bytes) {
    std::vector<std::int32_t> cps;
    cps.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        unsigned char u = static_cast<unsigned char>(bytes[i]);
        int extra = 0;
        std::int32_t cp = u;
        if (u >= 0xf0) { extra = 3; cp = u & 0x07; }
        else if (u >= 0xe0) { extra = 2; cp = u & 0x0f; }
        else if (u >= 0xc0) { extra = 1; cp = u & 0x1f; }
        if (i + extra >= bytes.size()) extra = 0, cp = u;
        for (int k = 1; k <= extra; ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(bytes[i + k]) & 0x3f);
        cps.push_back(cp);
        i += 1 + extra;
    }
    return cps;
}

inline void encode_utf8(std::int32_t cp, std::string& out) {
    if (cp < 0) return;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline std::string encode_utf8(const std::vector<std::int32_t>& cps, std::size_t from,
                               std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to && i < cps.size(); ++i) encode_utf8(cps[i], out);
    return out;
}

} // namespace dpc

#endif // DPC_TEXT_HPP
