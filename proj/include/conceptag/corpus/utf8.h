#ifndef CONCEPTAG_CORPUS_UTF8_H_
#define CONCEPTAG_CORPUS_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace conceptag::utf8 {

// Returns true if `text` is well-formed UTF-8 (no overlongs, no surrogates).
bool IsValid(std::string_view text);

// Splits valid UTF-8 into one string per code point.
std::vector<std::string> Characters(std::string_view text);

// ASCII-only lowercasing; bytes >= 0x80 are copied through.
std::string AsciiLower(std::string_view text);

}  // namespace conceptag::utf8

#endif  // CONCEPTAG_CORPUS_UTF8_H_
