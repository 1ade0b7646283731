#pragma once

#include <stdexcept>
#include <string>

namespace hyperrag {

// Every recoverable failure carries one of these codes so callers and
// tests can branch on the condition instead of parsing messages.
enum class Errc {
    EmptyName,
    UnknownEntity,
    ArityTooSmall,
    WeightOutOfRange,
    DimensionMismatch,
    ZeroVector,
    IoError,
    VersionMismatch,
    CorruptManifest,
    DecodeError,
    ProviderError,
    EmptyInput,
    EmptyCaption,
    EmptyDocument,
    ParseFailure,
    EmptyRankings,
    MissingDescriptor,
    KbNotLoaded,
    ContextOverflow,
    ConfigError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace hyperrag
