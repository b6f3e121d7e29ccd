#include "tutor/auth.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <stdexcept>

#include "tutor/error.hpp"

namespace tutor::auth {

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

std::string base64url_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto n = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                   static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const auto rest = bytes.size() - i;
  if (rest == 1) {
    const auto n = static_cast<unsigned char>(bytes[i]) << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
  } else if (rest == 2) {
    const auto n = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
  }
  return out;
}

std::optional<std::string> base64url_decode(std::string_view text) {
  if (text.size() % 4 == 1) return std::nullopt;
  std::string out;
  unsigned buffer = 0;
  int bits = 0;
  for (const char c : text) {
    const auto pos = kAlphabet.find(c);
    if (pos == std::string_view::npos) return std::nullopt;
    buffer = (buffer << 6) | static_cast<unsigned>(pos);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xff));
    }
  }
  return out;
}

bool plausible_email(std::string_view email) {
  if (email.empty() || email.size() > 254) return false;
  if (std::any_of(email.begin(), email.end(), [](unsigned char c) { return c <= ' ' || c == 0x7f; })) return false;
  const auto at = email.find('@');
  if (at == 0 || at == std::string_view::npos || email.find('@', at + 1) != std::string_view::npos) return false;
  const auto domain = email.substr(at + 1);
  const auto dot = domain.find('.');
  return dot != std::string_view::npos && dot > 0 && dot + 1 < domain.size();
}

TokenSigner::TokenSigner(std::string secret, Clock& clock, std::chrono::seconds ttl)
    : secret_(std::move(secret)), clock_(clock), ttl_(ttl) {
  if (secret_.empty()) {
    std::array<unsigned char, 32> bytes{};
    if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1) throw Error("RAND_bytes failed");
    secret_.assign(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
}

std::string TokenSigner::mac(std::string_view payload) const {
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), secret_.data(), static_cast<int>(secret_.size()),
       reinterpret_cast<const unsigned char*>(payload.data()), payload.size(), out.data(), &len);
  return std::string(reinterpret_cast<const char*>(out.data()), len);
}

std::string TokenSigner::issue(std::string_view learner_id) {
  const auto expiry = to_millis(clock_.now()) + std::chrono::duration_cast<std::chrono::milliseconds>(ttl_).count();
  const auto payload = std::string(learner_id) + "|" + std::to_string(expiry);
  return base64url_encode(payload) + "." + base64url_encode(mac(payload));
}

std::optional<std::string> TokenSigner::verify(std::string_view token) {
  const auto dot = token.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  const auto payload = base64url_decode(token.substr(0, dot));
  const auto sig = base64url_decode(token.substr(dot + 1));
  if (!payload || !sig) return std::nullopt;
  const auto expected = mac(*payload);
  if (sig->size() != expected.size() || CRYPTO_memcmp(sig->data(), expected.data(), expected.size()) != 0) {
    return std::nullopt;
  }
  const auto bar = payload->rfind('|');
  if (bar == std::string::npos || bar == 0) return std::nullopt;
  std::int64_t expiry = 0;
  const auto* begin = payload->data() + bar + 1;
  const auto* end = payload->data() + payload->size();
  if (auto [p, ec] = std::from_chars(begin, end, expiry); ec != std::errc{} || p != end) return std::nullopt;
  if (to_millis(clock_.now()) >= expiry) return std::nullopt;
  return payload->substr(0, bar);
}

}  // namespace tutor::auth
