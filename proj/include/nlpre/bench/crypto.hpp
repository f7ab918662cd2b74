#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace nlpre::bench {

std::string sha256_hex(std::string_view data);
// n bytes from the OS CSPRNG, hex encoded.
std::string random_hex(std::size_t n);
// Constant-time comparison of equal-length strings.
bool equal_secret(std::string_view a, std::string_view b);

}  // namespace nlpre::bench
