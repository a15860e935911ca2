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

#ifndef VCROBUST_ERROR_HPP
#define VCROBUST_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcrobust {

/// Every failure the library reports. The enumerator names are part of the
/// public contract: they show up in CLI error lines and in HTTP error bodies.
enum class ErrorCode {
  // audio_core
  MalformedWav,
  UnsupportedEncoding,
  IoFailure,
  InvalidRate,
  EmptyBuffer,
  // augment
  SilentSignal,
  SilentNoise,
  RateMismatch,
  InvalidParams,
  InvalidConfig,
  UnresolvableNoiseRef,
  // suite
  MissingHeader,
  EmptyManifest,
  MissingSpeakerInfo,
  InsufficientClips,
  TargetInSources,
  UnsupportedAudio,
  // evalsvc
  SuiteNotLoaded,
  UnknownSession,
  ScoreOutOfRange,
  IndexAhead,
  NotFound,
  Forbidden,
  Unauthorized,
  CorruptStore,
  // analysis
  LengthMismatch,
  TooFewPoints,
  UnknownModel,
  BadBinWidth,
  // generic
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Coarse classification used for process exit codes.
enum class ErrorClass { Usage = 1, Data = 2, Io = 3 };

ErrorClass classify(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace vcrobust

#endif  // VCROBUST_ERROR_HPP
