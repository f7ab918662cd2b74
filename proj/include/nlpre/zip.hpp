#pragma once
// Minimal ZIP container support: stored and deflated entries, no encryption,
// no ZIP64. Enough for submission archives of a few dozen files.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nlpre::zip {

class ZipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Entry {
  std::string name;
  std::string data;
};

// Reads every file entry (directories skipped) via the central directory and
// checks CRC-32 of each. Throws ZipError on anything malformed.
std::vector<Entry> read_archive(std::string_view bytes);

// Cheap sniff used before a full read.
bool looks_like_zip(std::string_view bytes);

std::string write_archive(const std::vector<Entry>& entries, bool deflate = true);

}  // namespace nlpre::zip
