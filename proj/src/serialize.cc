#include "conceptag/serialize.h"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace conceptag::serialize {

std::string Hex(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%a", value);
  return buffer;
}

double ParseDouble(const std::string &text) {
  const char *begin = text.c_str();
  char *end = nullptr;
  errno = 0;
  double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw FormatError("expected a number, found '" + text + "'");
  }
  return value;
}

std::string Next(std::istream &in, const char *what) {
  std::string token;
  if (!(in >> token)) throw FormatError(std::string("unexpected end of input reading ") + what);
  return token;
}

double NextDouble(std::istream &in, const char *what) { return ParseDouble(Next(in, what)); }

long long NextInt(std::istream &in, const char *what) {
  std::string token = Next(in, what);
  char *end = nullptr;
  long long value = std::strtoll(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0') {
    throw FormatError(std::string("expected an integer for ") + what + ", found '" + token + "'");
  }
  return value;
}

void Expect(std::istream &in, const std::string &expected) {
  std::string token = Next(in, expected.c_str());
  if (token != expected) {
    throw FormatError("expected '" + expected + "', found '" + token + "'");
  }
}

}  // namespace conceptag::serialize
