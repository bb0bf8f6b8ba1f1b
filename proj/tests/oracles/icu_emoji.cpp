#include <unicode/brkiter.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>

#include <memory>
#include <stdexcept>

#include "oracles/oracles.hpp"

namespace oracle {

namespace {

template <class Fn>
void for_each_cluster(std::string_view utf8, Fn&& fn) {
    const icu::UnicodeString text = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), utf8.size()));
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status)) throw std::runtime_error("ICU character break iterator unavailable");
    it->setText(text);
    int32_t start = it->first();
    for (int32_t end = it->next(); end != icu::BreakIterator::DONE; start = end, end = it->next()) {
        fn(text.tempSubStringBetween(start, end));
    }
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

}  // namespace

std::vector<std::string> icu_graphemes(std::string_view utf8) {
    std::vector<std::string> out;
    for_each_cluster(utf8, [&](const icu::UnicodeString& cluster) { out.push_back(to_utf8(cluster)); });
    return out;
}

std::vector<std::string> icu_emojis(std::string_view utf8) {
    std::vector<std::string> out;
    for_each_cluster(utf8, [&](const icu::UnicodeString& cluster) {
        std::vector<UChar32> cps;
        for (int32_t i = 0; i < cluster.length(); i = cluster.moveIndex32(i, 1)) cps.push_back(cluster.char32At(i));
        std::size_t base = 0;
        while (base + 1 < cps.size() &&
               u_getIntPropertyValue(cps[base], UCHAR_GRAPHEME_CLUSTER_BREAK) == U_GCB_PREPEND) {
            ++base;
        }
        const UChar32 cp = cps[base];
        const UChar32 next = base + 1 < cps.size() ? cps[base + 1] : 0;
        const bool presentation = u_hasBinaryProperty(cp, UCHAR_EMOJI_PRESENTATION) && next != 0xFE0E;
        const bool requested = next == 0xFE0F && u_hasBinaryProperty(cp, UCHAR_EMOJI);
        if (presentation || requested) out.push_back(to_utf8(cluster));
    });
    return out;
}

}  // namespace oracle
