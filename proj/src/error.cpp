/**
 * Copyright 2026 The vcrobust Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vcrobust/error.hpp"

namespace vcrobust {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedWav: return "MalformedWav";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::EmptyBuffer: return "EmptyBuffer";
    case ErrorCode::SilentSignal: return "SilentSignal";
    case ErrorCode::SilentNoise: return "SilentNoise";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnresolvableNoiseRef: return "UnresolvableNoiseRef";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::MissingSpeakerInfo: return "MissingSpeakerInfo";
    case ErrorCode::InsufficientClips: return "InsufficientClips";
    case ErrorCode::TargetInSources: return "TargetInSources";
    case ErrorCode::UnsupportedAudio: return "UnsupportedAudio";
    case ErrorCode::SuiteNotLoaded: return "SuiteNotLoaded";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::IndexAhead: return "IndexAhead";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::BadBinWidth: return "BadBinWidth";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoFailure:
      return ErrorClass::Io;
    case ErrorCode::InvalidArgument:
      return ErrorClass::Usage;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace vcrobust
