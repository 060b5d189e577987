#ifndef DPC_CHARCLASS_HPP
#define DPC_CHARCLASS_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace dpc {

/// End-of-input sentinel codepoint. Lives outside the Unicode range so it
/// can participate in character classes (the augmented start production
/// ends in [EOF]).
constexpr std::int32_t kEofCodepoint = -1;

/// A set of codepoints stored as sorted, non-overlapping, non-adjacent
/// inclusive ranges. The terminal alphabet of character-level grammars.
class CharClass {
public:
    struct Range {
        std::int32_t lo;
        std::int32_t hi; // inclusive

        friend bool operator==(const Range&, const Range&) = default;
    };

    CharClass() = default;

    static CharClass single(std::int32_t cp) { return range(cp, cp); }

    static CharClass range(std::int32_t lo, std::int32_t hi) {
        CharClass cc;
        cc.add(lo, hi);
        return cc;
    }

    static CharClass eof() { return single(kEofCodepoint); }

    /// Inserts [lo,hi], merging overlapping or adjacent ranges.
    void add(std::int32_t lo, std::int32_t hi) {
        if (lo > hi) return;
        ranges_.push_back({lo, hi});
        normalize();
    }

    void add(const CharClass& other) {
        ranges_.insert(ranges_.end(), other.ranges_.begin(), other.ranges_.end());
        normalize();
    }

    bool empty() const { return ranges_.empty(); }

    bool contains(std::int32_t cp) const {
        auto it = std::upper_bound(ranges_.begin(), ranges_.end(), cp,
                                   [](std::int32_t v, const Range& r) { return v < r.lo; });
        if (it == ranges_.begin()) return false;
        --it;
        return cp <= it->hi;
    }

    const std::vector<Range>& ranges() const { return ranges_; }

    friend bool operator==(const CharClass&, const CharClass&) = default;

    /// Grammar-file surface syntax: [a-z0-9] with the escapes
    /// \  \t \n \r \\ \] \-  for space, tab, newline, CR, backslash,
    /// bracket and dash.
    std::string to_string() const {
        std::string out = "[";
        for (const Range& r : ranges_) {
            out += escape_cp(r.lo);
            if (r.hi != r.lo) {
                out += '-';
                out += escape_cp(r.hi);
            }
        }
        out += ']';
        return out;
    }

private:
    static std::string escape_cp(std::int32_t cp) {
        switch (cp) {
            case ' ': return "\\ ";
            case '\t': return "\\t";
            case '\n': return "\\n";
            case '\r': return "\\r";
            case '\\': return "\\\\";
            case ']': return "\\]";
            case '-': return "\\-";
            default: break;
        }
        if (cp == kEofCodepoint) return "\\EOF"; // only appears in debug output
        std::string s;
        if (cp >= 0x20 && cp < 0x7f) {
            s.push_back(static_cast<char>(cp));
            return s;
        }
        if (cp >= 0x80) { // raw UTF-8 keeps the class reparseable
            if (cp < 0x800) {
                s.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            } else if (cp < 0x10000) {
                s.push_back(static_cast<char>(0xe0 | (cp >> 12)));
                s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            } else {
                s.push_back(static_cast<char>(0xf0 | (cp >> 18)));
                s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
                s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            }
            s.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
            return s;
        }
        // Unwritable control characters; debug output only.
        char buf[16];
        std::snprintf(buf, sizeof buf, "\\u{%x}", static_cast<unsigned>(cp));
        return buf;
    }

    void normalize() {
        if (ranges_.size() < 2) return;
        std::sort(ranges_.begin(), ranges_.end(),
                  [](const Range& a, const Range& b) { return a.lo < b.lo; });
        std::vector<Range> merged;
        merged.push_back(ranges_[0]);
        for (std::size_t i = 1; i < ranges_.size(); ++i) {
            Range& back = merged.back();
            if (ranges_[i].lo <= back.hi + 1) {
                back.hi = std::max(back.hi, ranges_[i].hi);
            } else {
                merged.push_back(ranges_[i]);
            }
        }
        ranges_ = std::move(merged);
    }

    std::vector<Range> ranges_;
};

} // namespace dpc

#endif // DPC_CHARCLASS_HPP
