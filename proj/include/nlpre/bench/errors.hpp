#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nlpre::bench {

enum class ServiceErrorCode {
  ConfigSyntax,
  MissingGold,
  InvalidGold,
  DuplicateId,
  TooLarge,
  NotAZip,
  DuplicateArchive,
  NotFound,
  WrongToken,
  WrongState,
  UnknownTagset,
  UnknownDataset,
  BadQuery,
  Storage,
};

std::string_view to_string(ServiceErrorCode code);

// Machine-readable reasons recorded on a rejected submission.
namespace reason {
inline constexpr std::string_view kBadManifest = "BadManifest";
inline constexpr std::string_view kUnknownTagset = "UnknownTagset";
inline constexpr std::string_view kUnsupportedTask = "UnsupportedTask";
inline constexpr std::string_view kMissingDataset = "MissingDataset";
inline constexpr std::string_view kInvalidConllu = "InvalidConllu";
inline constexpr std::string_view kTextMismatch = "TextMismatch";
inline constexpr std::string_view kNotAZip = "NotAZip";
inline constexpr std::string_view kEngineError = "EngineError";
}  // namespace reason

class ServiceError : public std::runtime_error {
 public:
  ServiceError(ServiceErrorCode code, const std::string& message, std::optional<std::string> reference = {});
  ServiceErrorCode code() const { return code_; }
  // For DuplicateArchive: the id of the earlier submission.
  const std::optional<std::string>& reference() const { return reference_; }

 private:
  ServiceErrorCode code_;
  std::optional<std::string> reference_;
};

}  // namespace nlpre::bench
