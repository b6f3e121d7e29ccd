#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "tutor/clock.hpp"

namespace tutor::auth {

/// Issues and verifies bearer tokens of the form
/// base64url("<learner_id>|<expiry ms>") "." base64url(HMAC-SHA256).
class TokenSigner {
 public:
  /// An empty secret is replaced by 32 random bytes.
  TokenSigner(std::string secret, Clock& clock, std::chrono::seconds ttl = std::chrono::hours(24 * 7));

  std::string issue(std::string_view learner_id);
  /// The learner id, or nothing for malformed, forged or expired tokens.
  std::optional<std::string> verify(std::string_view token);

 private:
  std::string mac(std::string_view payload) const;

  std::string secret_;
  Clock& clock_;
  std::chrono::seconds ttl_;
};

std::string base64url_encode(std::string_view bytes);
std::optional<std::string> base64url_decode(std::string_view text);

/// Basic shape check: one '@' with non-empty local part and a dotted domain, no whitespace.
bool plausible_email(std::string_view email);

}  // namespace tutor::auth
