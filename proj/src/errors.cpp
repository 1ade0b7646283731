#include "hyperrag/errors.hpp"

namespace hyperrag {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::EmptyName: return "EmptyName";
        case Errc::UnknownEntity: return "UnknownEntity";
        case Errc::ArityTooSmall: return "ArityTooSmall";
        case Errc::WeightOutOfRange: return "WeightOutOfRange";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::ZeroVector: return "ZeroVector";
        case Errc::IoError: return "IoError";
        case Errc::VersionMismatch: return "VersionMismatch";
        case Errc::CorruptManifest: return "CorruptManifest";
        case Errc::DecodeError: return "DecodeError";
        case Errc::ProviderError: return "ProviderError";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::EmptyCaption: return "EmptyCaption";
        case Errc::EmptyDocument: return "EmptyDocument";
        case Errc::ParseFailure: return "ParseFailure";
        case Errc::EmptyRankings: return "EmptyRankings";
        case Errc::MissingDescriptor: return "MissingDescriptor";
        case Errc::KbNotLoaded: return "KbNotLoaded";
        case Errc::ContextOverflow: return "ContextOverflow";
        case Errc::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

} // namespace hyperrag
