#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace memestat::unicode {

/// Grapheme_Cluster_Break classes (UAX #29).
enum class BreakClass : unsigned char {
    Other = 0,
    CR,
    LF,
    Control,
    Extend,
    ZWJ,
    RegionalIndicator,
    Prepend,
    SpacingMark,
    L,
    V,
    T,
    LV,
    LVT,
};

inline constexpr char32_t kZeroWidthJoiner = 0x200D;
inline constexpr char32_t kTextPresentation = 0xFE0E;
inline constexpr char32_t kEmojiPresentation = 0xFE0F;
inline constexpr char32_t kReplacement = 0xFFFD;

/// Lenient decoder: each invalid or truncated sequence becomes one U+FFFD.
std::u32string decode_utf8(std::string_view text);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view cps);

BreakClass break_class(char32_t cp);
bool is_extended_pictographic(char32_t cp);
/// Unicode `Emoji` property (includes text-default emoji such as U+2764 and ASCII digits).
bool has_emoji_property(char32_t cp);
/// Whitespace, punctuation, symbols, controls and emoji; apostrophes are not separators.
bool is_word_separator(char32_t cp);

struct Cluster {
    std::size_t begin;
    std::size_t end;
};

/// Extended grapheme cluster boundaries over a codepoint sequence.
std::vector<Cluster> grapheme_clusters(std::u32string_view cps);

}  // namespace memestat::unicode
