#include "attachsim/aka.hpp"

#include <algorithm>

#include "attachsim/errors.hpp"

namespace attachsim {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

SubscriberKey SubscriberKey::from_hex(std::string_view hex) {
  if (hex.size() != 32) throw ConfigError("subscriber key must be 32 hex digits");
  std::array<std::uint8_t, 16> k{};
  for (std::size_t i = 0; i < 16; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ConfigError("subscriber key has a non-hex digit");
    k[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return SubscriberKey(k);
}

SubscriberKey SubscriberKey::random(RngStream& rng) {
  std::array<std::uint8_t, 16> k{};
  for (auto& b : k) b = static_cast<std::uint8_t>(rng.next_u64() >> 56);
  return SubscriberKey(k);
}

std::string SubscriberKey::hex() const { return to_hex(k_); }

std::string_view to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::XorTest: return "XorTest";
    case AlgorithmKind::Milenage: return "Milenage";
    case AlgorithmKind::Tuak: return "Tuak";
    case AlgorithmKind::Custom: return "Custom";
  }
  return "Custom";
}

AkaVector xor_test_compute(const SubscriberKey& k, const Rand& rand) {
  std::array<std::uint8_t, 16> x{};
  for (std::size_t i = 0; i < 16; ++i) x[i] = k.bytes()[i] ^ rand[i];
  AkaVector v;
  std::copy_n(x.begin(), v.res.size(), v.res.begin());
  std::rotate_copy(x.begin(), x.begin() + 1, x.end(), v.autn.begin());
  return v;
}

AuthAlgorithm xor_test_algorithm(LatencyMoments latency) {
  return AuthAlgorithm{AlgorithmKind::XorTest, "XorTest", &xor_test_compute, latency};
}

AlgorithmRegistry::AlgorithmRegistry() { add(xor_test_algorithm()); }

void AlgorithmRegistry::add(AuthAlgorithm alg) {
  if (!alg.compute) throw ConfigError("algorithm '" + alg.name + "' has no compute function");
  algs_[alg.name] = std::move(alg);
}

bool AlgorithmRegistry::contains(std::string_view name) const { return algs_.contains(name); }

const AuthAlgorithm& AlgorithmRegistry::get(std::string_view name) const {
  const auto it = algs_.find(name);
  if (it == algs_.end()) {
    throw ConfigError("no implementation registered for auth algorithm '" + std::string(name) + "'");
  }
  return it->second;
}

AuthChallenge generate_challenge(const SubscriberKey& k, RngStream& rng, const AuthAlgorithm& alg) {
  AuthChallenge c;
  for (std::size_t i = 0; i < c.rand.size(); i += 8) {
    std::uint64_t word = rng.next_u64();
    for (std::size_t j = 0; j < 8; ++j, word >>= 8) c.rand[i + j] = static_cast<std::uint8_t>(word);
  }
  const AkaVector v = alg.compute(k, c.rand);
  c.autn = v.autn;
  c.xres = v.res;
  return c;
}

std::variant<AuthResponse, AuthFailure> compute_response(const SubscriberKey& k, const Rand& rand,
                                                         const Autn& autn,
                                                         const AuthAlgorithm& alg) {
  const AkaVector v = alg.compute(k, rand);
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < autn.size(); ++i) diff |= static_cast<std::uint8_t>(v.autn[i] ^ autn[i]);
  if (diff != 0) return AuthFailure{AuthFailureReason::MacMismatch};
  return AuthResponse{v.res};
}

bool verify(std::span<const std::uint8_t> xres, std::span<const std::uint8_t> res) {
  if (xres.size() != 8 || res.size() != 8) throw ConfigError("RES/XRES must be 8 bytes");
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < 8; ++i) diff |= static_cast<std::uint8_t>(xres[i] ^ res[i]);
  return diff == 0;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

}  // namespace attachsim
