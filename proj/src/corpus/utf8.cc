#include "conceptag/corpus/utf8.h"

namespace conceptag::utf8 {
namespace {

// Length of the sequence introduced by `lead`, or 0 for an invalid lead byte.
int SequenceLength(unsigned char lead) {
  if (lead < 0x80) return 1;
  if (lead >= 0xC2 && lead <= 0xDF) return 2;
  if (lead >= 0xE0 && lead <= 0xEF) return 3;
  if (lead >= 0xF0 && lead <= 0xF4) return 4;
  return 0;
}

bool IsContinuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Validates the sequence at text[i] and returns its length, 0 if invalid.
size_t ValidSequenceAt(std::string_view text, size_t i) {
  auto lead = static_cast<unsigned char>(text[i]);
  int n = SequenceLength(lead);
  if (n == 0 || i + n > text.size()) return 0;
  for (int k = 1; k < n; ++k) {
    if (!IsContinuation(static_cast<unsigned char>(text[i + k]))) return 0;
  }
  auto second = static_cast<unsigned char>(n > 1 ? text[i + 1] : 0);
  if (lead == 0xE0 && second < 0xA0) return 0;  // overlong
  if (lead == 0xED && second > 0x9F) return 0;  // surrogate
  if (lead == 0xF0 && second < 0x90) return 0;  // overlong
  if (lead == 0xF4 && second > 0x8F) return 0;  // > U+10FFFF
  return n;
}

}  // namespace

bool IsValid(std::string_view text) {
  for (size_t i = 0; i < text.size();) {
    size_t n = ValidSequenceAt(text, i);
    if (n == 0) return false;
    i += n;
  }
  return true;
}

std::vector<std::string> Characters(std::string_view text) {
  std::vector<std::string> chars;
  for (size_t i = 0; i < text.size();) {
    size_t n = ValidSequenceAt(text, i);
    if (n == 0) n = 1;  // pass stray bytes through one at a time
    chars.emplace_back(text.substr(i, n));
    i += n;
  }
  return chars;
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace conceptag::utf8
