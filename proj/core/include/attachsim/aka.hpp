#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "attachsim/distributions.hpp"
#include "attachsim/rng.hpp"

namespace attachsim {

using Rand = std::array<std::uint8_t, 16>;
using Autn = std::array<std::uint8_t, 16>;
using Res = std::array<std::uint8_t, 8>;

class SubscriberKey {
public:
  SubscriberKey() = default;
  explicit SubscriberKey(const std::array<std::uint8_t, 16>& k) : k_(k) {}

  // Throws ConfigError unless `hex` is exactly 32 hex digits.
  static SubscriberKey from_hex(std::string_view hex);
  static SubscriberKey random(RngStream& rng);

  const std::array<std::uint8_t, 16>& bytes() const { return k_; }
  std::string hex() const;
  bool operator==(const SubscriberKey&) const = default;

private:
  std::array<std::uint8_t, 16> k_{};
};

// Output of the SIM-side authentication function for one (K, RAND).
struct AkaVector {
  Res res{};
  Autn autn{};
};

enum class AlgorithmKind { XorTest, Milenage, Tuak, Custom };

std::string_view to_string(AlgorithmKind k);

// A SIM authentication algorithm. `compute` must be pure. `latency` is extra
// on-SIM processing added to the authentication response, on top of whatever
// the device profile already accounts for.
struct AuthAlgorithm {
  AlgorithmKind kind = AlgorithmKind::XorTest;
  std::string name;
  std::function<AkaVector(const SubscriberKey&, const Rand&)> compute;
  LatencyMoments latency{};
};

// X = K xor RAND; RES = X[0..8); AUTN = X rotated left by one byte.
AkaVector xor_test_compute(const SubscriberKey& k, const Rand& rand);
AuthAlgorithm xor_test_algorithm(LatencyMoments latency = {});

// Name -> algorithm lookup. XorTest is always present; Milenage and Tuak are
// slots that stay empty until an implementation is registered.
class AlgorithmRegistry {
public:
  AlgorithmRegistry();

  void add(AuthAlgorithm alg);
  bool contains(std::string_view name) const;
  const AuthAlgorithm& get(std::string_view name) const;

private:
  std::map<std::string, AuthAlgorithm, std::less<>> algs_;
};

struct AuthChallenge {
  Rand rand{};
  Autn autn{};
  Res xres{};
};

struct AuthResponse {
  Res res{};
};

enum class AuthFailureReason { MacMismatch };

struct AuthFailure {
  AuthFailureReason reason = AuthFailureReason::MacMismatch;
};

AuthChallenge generate_challenge(const SubscriberKey& k, RngStream& rng, const AuthAlgorithm& alg);

// SIM side: checks AUTN against its own key before releasing RES.
std::variant<AuthResponse, AuthFailure> compute_response(const SubscriberKey& k, const Rand& rand,
                                                         const Autn& autn,
                                                         const AuthAlgorithm& alg);

// Constant-time comparison of 8-byte responses. Throws ConfigError on any
// other length.
bool verify(std::span<const std::uint8_t> xres, std::span<const std::uint8_t> res);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace attachsim
