#include "memestat/unicode.hpp"

#include <algorithm>
#include <span>

namespace memestat::unicode {

namespace {

struct CodeRange {
    char32_t lo;
    char32_t hi;
};

struct ClassRange {
    char32_t lo;
    char32_t hi;
    BreakClass value;
};

#include "unicode_tables.inc"

template <typename R>
const R* find_range(std::span<const R> table, char32_t cp) {
    auto it = std::upper_bound(table.begin(), table.end(), cp, [](char32_t c, const R& r) { return c < r.lo; });
    if (it == table.begin()) return nullptr;
    --it;
    return cp <= it->hi ? &*it : nullptr;
}

bool in_table(std::span<const CodeRange> table, char32_t cp) {
    return find_range(table, cp) != nullptr;
}

// Consonant (Extend with ccc != 0 | ZWJ)* containing a virama, awaiting another consonant.
enum class Conjunct { None, Consonant, Linked };

bool is_conjunct_extend(char32_t cp, BreakClass c) {
    return c == BreakClass::ZWJ || in_table(kNonSpacingExtend, cp);
}

bool is_control_like(BreakClass c) {
    return c == BreakClass::Control || c == BreakClass::CR || c == BreakClass::LF;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        std::size_t len = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
            min = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
            min = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
            min = 0x10000;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        std::size_t used = 1;
        bool ok = true;
        for (; used < len; ++used) {
            if (i + used >= n) {
                ok = false;
                break;
            }
            const auto b = static_cast<unsigned char>(text[i + used]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacement);
            i += std::max<std::size_t>(used, 1);
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

BreakClass break_class(char32_t cp) {
    const ClassRange* r = find_range(std::span<const ClassRange>(kBreakClasses), cp);
    return r ? r->value : BreakClass::Other;
}

bool is_extended_pictographic(char32_t cp) {
    return in_table(kExtendedPictographic, cp);
}

bool has_emoji_property(char32_t cp) {
    return in_table(kEmoji, cp);
}

bool is_word_separator(char32_t cp) {
    return in_table(kWordSeparators, cp);
}

std::vector<Cluster> grapheme_clusters(std::u32string_view cps) {
    std::vector<Cluster> out;
    if (cps.empty()) return out;

    using BC = BreakClass;
    BC prev = break_class(cps[0]);
    bool pict_extend = is_extended_pictographic(cps[0]);  // ExtPict Extend* ends at prev
    bool pict_zwj = false;                                 // ExtPict Extend* ZWJ ends at prev
    std::size_t ri_run = prev == BC::RegionalIndicator ? 1 : 0;
    Conjunct conjunct = in_table(kConjunctConsonant, cps[0]) ? Conjunct::Consonant : Conjunct::None;
    std::size_t start = 0;

    for (std::size_t i = 1; i < cps.size(); ++i) {
        const BC cur = break_class(cps[i]);
        const bool pict = is_extended_pictographic(cps[i]);
        const bool consonant = in_table(kConjunctConsonant, cps[i]);
        bool split;
        if (prev == BC::CR && cur == BC::LF) {
            split = false;
        } else if (is_control_like(prev) || is_control_like(cur)) {
            split = true;
        } else if (prev == BC::L && (cur == BC::L || cur == BC::V || cur == BC::LV || cur == BC::LVT)) {
            split = false;
        } else if ((prev == BC::LV || prev == BC::V) && (cur == BC::V || cur == BC::T)) {
            split = false;
        } else if ((prev == BC::LVT || prev == BC::T) && cur == BC::T) {
            split = false;
        } else if (cur == BC::Extend || cur == BC::ZWJ || cur == BC::SpacingMark) {
            split = false;
        } else if (prev == BC::Prepend) {
            split = false;
        } else if (conjunct == Conjunct::Linked && consonant) {
            split = false;
        } else if (pict_zwj && pict) {
            split = false;
        } else if (prev == BC::RegionalIndicator && cur == BC::RegionalIndicator) {
            split = ri_run % 2 == 0;
        } else {
            split = true;
        }

        if (split) {
            out.push_back({start, i});
            start = i;
        }
        pict_zwj = cur == BC::ZWJ && pict_extend;
        pict_extend = pict || (cur == BC::Extend && pict_extend);
        ri_run = cur == BC::RegionalIndicator ? ri_run + 1 : 0;
        if (consonant) {
            conjunct = Conjunct::Consonant;
        } else if (conjunct != Conjunct::None && is_conjunct_extend(cps[i], cur)) {
            if (in_table(kConjunctLinker, cps[i])) conjunct = Conjunct::Linked;
        } else {
            conjunct = Conjunct::None;
        }
        prev = cur;
    }
    out.push_back({start, cps.size()});
    return out;
}

}  // namespace memestat::unicode
