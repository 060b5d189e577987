#ifndef DPC_TOKEN_SET_HPP
#define DPC_TOKEN_SET_HPP

#include <cstdint>
#include <string>

namespace dpc {

/// Fixed-width bitset over a token universe of at most 128 watched
/// productions. Bit i corresponds to universe index i (LSB of word 0 is
/// index 0). Two machine words keep propagation and constraint checks
/// branch-free in the reduce loop.
class TokenSet {
public:
    static constexpr int kMaxBits = 128;

    constexpr TokenSet() : w_{0, 0} {}

    static constexpr TokenSet single(int bit) {
        TokenSet s;
        s.set(bit);
        return s;
    }

    constexpr void set(int bit) { w_[bit >> 6] |= std::uint64_t{1} << (bit & 63); }
    constexpr bool test(int bit) const {
        return (w_[bit >> 6] >> (bit & 63)) & 1u;
    }

    constexpr bool empty() const { return (w_[0] | w_[1]) == 0; }

    constexpr bool intersects(const TokenSet& o) const {
        return ((w_[0] & o.w_[0]) | (w_[1] & o.w_[1])) != 0;
    }

    friend constexpr TokenSet operator|(const TokenSet& a, const TokenSet& b) {
        TokenSet r;
        r.w_[0] = a.w_[0] | b.w_[0];
        r.w_[1] = a.w_[1] | b.w_[1];
        return r;
    }
    friend constexpr TokenSet operator&(const TokenSet& a, const TokenSet& b) {
        TokenSet r;
        r.w_[0] = a.w_[0] & b.w_[0];
        r.w_[1] = a.w_[1] & b.w_[1];
        return r;
    }
    TokenSet& operator|=(const TokenSet& o) {
        w_[0] |= o.w_[0];
        w_[1] |= o.w_[1];
        return *this;
    }
    TokenSet& operator&=(const TokenSet& o) {
        w_[0] &= o.w_[0];
        w_[1] &= o.w_[1];
        return *this;
    }

    friend constexpr bool operator==(const TokenSet& a, const TokenSet& b) {
        return a.w_[0] == b.w_[0] && a.w_[1] == b.w_[1];
    }
    friend constexpr bool operator!=(const TokenSet& a, const TokenSet& b) {
        return !(a == b);
    }

    int count() const {
        return __builtin_popcountll(w_[0]) + __builtin_popcountll(w_[1]);
    }

    /// Lowercase hex, least-significant bit = universe index 0, no leading
    /// zeros ("0" when empty). This is the wire format used in tables.
    std::string to_hex() const {
        if (empty()) return "0";
        static const char* digits = "0123456789abcdef";
        std::string out;
        bool started = false;
        for (int nib = 31; nib >= 0; --nib) {
            unsigned v = static_cast<unsigned>((w_[nib >= 16] >> ((nib & 15) * 4)) & 0xf);
            if (!started && v == 0) continue;
            started = true;
            out.push_back(digits[v]);
        }
        return out;
    }

    /// Parses the to_hex format. Returns false on bad characters or overflow.
    static bool from_hex(const std::string& hex, TokenSet& out) {
        if (hex.empty() || hex.size() > 32) return false;
        out = TokenSet();
        int nib = 0;
        for (auto it = hex.rbegin(); it != hex.rend(); ++it, ++nib) {
            char c = *it;
            unsigned v;
            if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
            else return false;
            out.w_[nib >= 16] |= std::uint64_t{v} << ((nib & 15) * 4);
        }
        return true;
    }

private:
    std::uint64_t w_[2];
};

} // namespace dpc

#endif // DPC_TOKEN_SET_HPP
