#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ranla {

/**
 * Token bucket over an injected clock: callers pass the current time
 * explicitly, so the limiter works identically under a wall clock or a
 * simulated one (which also keeps tests deterministic).
 *
 * The bucket starts full; the default burst of 5% of one second's tokens
 * keeps long-run admission within a fraction of a percent of the nominal
 * rate even under sustained overload.
 */
class TokenBucket {
 public:
  TokenBucket(double rate_per_s, double burst)
      : m_rate(rate_per_s), m_burst(burst), m_tokens(burst) {
    if (!(rate_per_s > 0.0)) throw std::invalid_argument("TokenBucket: rate must be positive");
    if (!(burst >= 1.0)) throw std::invalid_argument("TokenBucket: burst must be at least 1");
  }

  static TokenBucket with_default_burst(double rate_per_s) {
    return TokenBucket(rate_per_s, std::max(1.0, 0.05 * rate_per_s));
  }

  // Advances the clock to now_s and grants up to `want` tokens; returns
  // how many were admitted (the rest are rejected, not queued).
  int64_t admit(int64_t want, double now_s) {
    if (want < 0) throw std::invalid_argument("TokenBucket::admit: negative request");
    if (m_has_time && now_s > m_last_s) m_tokens = std::min(m_burst, m_tokens + m_rate * (now_s - m_last_s));
    if (!m_has_time || now_s > m_last_s) {
      m_last_s = now_s;
      m_has_time = true;
    }
    int64_t grant = std::min<int64_t>(want, static_cast<int64_t>(std::floor(m_tokens)));
    m_tokens -= static_cast<double>(grant);
    return grant;
  }

  double tokens() const { return m_tokens; }

 private:
  double m_rate, m_burst, m_tokens;
  double m_last_s = 0.0;
  bool m_has_time = false;
};

}  // namespace ranla
