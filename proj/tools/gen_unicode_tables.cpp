// Regenerates the bundled Unicode property tables from the host ICU.
//
//   gen_unicode_tables <out_inc> <out_emoji_ranges>
//
// Not part of the default build (configure with -DMEMESTAT_BUILD_TABLEGEN=ON).
// The library itself never links ICU; it only consumes the generated files.

#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/uversion.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Range {
    UChar32 lo;
    UChar32 hi;
    int value;
};

std::vector<Range> collect(const std::function<int(UChar32)>& classify) {
    std::vector<Range> out;
    for (UChar32 cp = 0; cp <= 0x10FFFF; ++cp) {
        const int v = classify(cp);
        if (v == 0) continue;
        if (!out.empty() && out.back().hi == cp - 1 && out.back().value == v) {
            out.back().hi = cp;
        } else {
            out.push_back({cp, cp, v});
        }
    }
    return out;
}

std::string hex(UChar32 cp) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%04X", static_cast<unsigned>(cp));
    return buf;
}

// Must stay in sync with memestat::unicode::BreakClass.
int break_class(UChar32 cp) {
    switch (u_getIntPropertyValue(cp, UCHAR_GRAPHEME_CLUSTER_BREAK)) {
        case U_GCB_CR: return 1;
        case U_GCB_LF: return 2;
        case U_GCB_CONTROL: return 3;
        case U_GCB_EXTEND: return 4;
        case U_GCB_ZWJ: return 5;
        case U_GCB_REGIONAL_INDICATOR: return 6;
        case U_GCB_PREPEND: return 7;
        case U_GCB_SPACING_MARK: return 8;
        case U_GCB_L: return 9;
        case U_GCB_V: return 10;
        case U_GCB_T: return 11;
        case U_GCB_LV: return 12;
        case U_GCB_LVT: return 13;
        default: return 0;
    }
}

bool is_conjunct_script(UChar32 cp) {
    UErrorCode err = U_ZERO_ERROR;
    switch (uscript_getScript(cp, &err)) {
        case USCRIPT_DEVANAGARI:
        case USCRIPT_BENGALI:
        case USCRIPT_GUJARATI:
        case USCRIPT_ORIYA:
        case USCRIPT_TELUGU:
        case USCRIPT_MALAYALAM: return true;
        default: return false;
    }
}

int indic_category(UChar32 cp) {
    return is_conjunct_script(cp) ? u_getIntPropertyValue(cp, UCHAR_INDIC_SYLLABIC_CATEGORY) : -1;
}

bool is_separator(UChar32 cp) {
    if (cp == 0x27 || cp == 0x2019) return false;  // apostrophes stay inside words
    const auto mask = U_GET_GC_MASK(cp);
    return (mask & (U_GC_P_MASK | U_GC_Z_MASK | U_GC_S_MASK | U_GC_CC_MASK)) != 0 ||
           u_isUWhiteSpace(cp) || u_hasBinaryProperty(cp, UCHAR_EXTENDED_PICTOGRAPHIC) ||
           (u_hasBinaryProperty(cp, UCHAR_EMOJI_COMPONENT) && !u_isdigit(cp));
}

void emit(std::ostream& os, const std::string& name, const std::vector<Range>& ranges, bool with_value) {
    os << "inline constexpr " << (with_value ? "ClassRange" : "CodeRange") << " " << name << "[] = {\n";
    for (const auto& r : ranges) {
        os << "    {" << hex(r.lo) << ", " << hex(r.hi);
        if (with_value) os << ", static_cast<BreakClass>(" << r.value << ")";
        os << "},\n";
    }
    os << "};\n\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: gen_unicode_tables <out_inc> <out_emoji_ranges>\n";
        return 1;
    }
    UVersionInfo uv;
    u_getUnicodeVersion(uv);
    char version[U_MAX_VERSION_STRING_LENGTH];
    u_versionToString(uv, version);

    std::ofstream inc(argv[1]);
    inc << "// Generated by tools/gen_unicode_tables.cpp from Unicode " << version << ". Do not edit.\n\n";
    emit(inc, "kBreakClasses", collect(break_class), true);
    emit(inc, "kExtendedPictographic",
         collect([](UChar32 cp) { return u_hasBinaryProperty(cp, UCHAR_EXTENDED_PICTOGRAPHIC) ? 1 : 0; }), false);
    emit(inc, "kEmoji", collect([](UChar32 cp) { return u_hasBinaryProperty(cp, UCHAR_EMOJI) ? 1 : 0; }), false);
    emit(inc, "kConjunctConsonant",
         collect([](UChar32 cp) { return indic_category(cp) == U_INSC_CONSONANT ? 1 : 0; }), false);
    emit(inc, "kConjunctLinker", collect([](UChar32 cp) { return indic_category(cp) == U_INSC_VIRAMA ? 1 : 0; }),
         false);
    emit(inc, "kNonSpacingExtend", collect([](UChar32 cp) {
             return u_getIntPropertyValue(cp, UCHAR_GRAPHEME_CLUSTER_BREAK) == U_GCB_EXTEND &&
                            u_getCombiningClass(cp) != 0
                        ? 1
                        : 0;
         }),
         false);
    emit(inc, "kWordSeparators", collect([](UChar32 cp) { return is_separator(cp) ? 1 : 0; }), false);

    std::ofstream ranges(argv[2]);
    ranges << "# Codepoints counted as emoji without a variation selector (Emoji_Presentation=Yes).\n";
    ranges << "# Unicode " << version << ". One hex_start..hex_end range per line.\n";
    for (const auto& r :
         collect([](UChar32 cp) { return u_hasBinaryProperty(cp, UCHAR_EMOJI_PRESENTATION) ? 1 : 0; })) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04X..%04X\n", static_cast<unsigned>(r.lo), static_cast<unsigned>(r.hi));
        ranges << buf;
    }
    return 0;
}
