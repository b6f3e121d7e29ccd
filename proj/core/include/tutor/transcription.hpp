#pragma once

#include <string>
#include <string_view>

#include "tutor/error.hpp"

namespace tutor::transcription {

/// Voice input extension point. Audio bytes in, learner text out.
class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual std::string transcribe(std::string_view audio, std::string_view content_type) = 0;
};

/// The only shipped implementation: always throws NotImplemented.
class UnavailableTranscriber final : public Transcriber {
 public:
  std::string transcribe(std::string_view, std::string_view) override {
    throw NotImplemented("speech transcription is not available in this build");
  }
};

}  // namespace tutor::transcription
