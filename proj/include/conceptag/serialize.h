#ifndef CONCEPTAG_SERIALIZE_H_
#define CONCEPTAG_SERIALIZE_H_

#include <istream>
#include <string>

#include "conceptag/errors.h"

namespace conceptag::serialize {

// Exact textual encoding of a double ("%a" hexfloat).
std::string Hex(double value);
// Parses decimal or hexfloat text; throws FormatError on trailing garbage.
double ParseDouble(const std::string &text);

// Reads the next whitespace-delimited token; throws FormatError at EOF.
std::string Next(std::istream &in, const char *what);
double NextDouble(std::istream &in, const char *what);
long long NextInt(std::istream &in, const char *what);
// Reads a token and checks it equals `expected`.
void Expect(std::istream &in, const std::string &expected);

}  // namespace conceptag::serialize

#endif  // CONCEPTAG_SERIALIZE_H_
