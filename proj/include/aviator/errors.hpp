#pragma once

#include <stdexcept>

namespace aviator {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };        // argument outside the operation's domain
struct ParseFailure : Error { using Error::Error; };       // malformed agent or tool output
struct ProviderError : Error { using Error::Error; };      // generation backend failed
struct ToolMissing : Error { using Error::Error; };        // external executable not found
struct ToolCrash : Error { using Error::Error; };          // external tool died without usable output
struct MissingArtifact : Error { using Error::Error; };    // workflow context key absent
struct UnknownCwe : Error { using Error::Error; };
struct CorpusError : Error { using Error::Error; };

}  // namespace aviator
