#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qcrypt/errors.hpp"
#include "qcrypt/random.hpp"

namespace qcrypt {

class SecretKey;

// Prime-field arithmetic for the polynomial hash, modulo the Mersenne prime
// 2^89 - 1. Exposed so tests can probe the hash directly.
namespace f89 {

using u128 = unsigned __int128;

u128 modulus();
u128 reduce(u128 x);  // full reduction of any 128-bit value
u128 add(u128 a, u128 b);
u128 mul(u128 a, u128 b);  // operands must already be reduced

}  // namespace f89

// Authentication tag: the low `width` bits of the message hash, masked with
// fresh one-time key bits.
struct Tag {
  std::uint64_t value = 0;
  int width = 0;

  std::string hex() const;
  static Tag from_hex(const std::string& h, int width);
};

enum class VerifyStatus { Accept, Reject };

struct TagResult;

// One party's reserve of shared one-time key bits for message
// authentication. Consumption is strictly sequential: the first use in an
// epoch draws 89 bits for the polynomial key, then every message draws
// `tag_width` fresh mask bits. Both directions of one conversation share the
// pool; messages must be tagged and verified in wire order or the pools
// desynchronize.
class AuthKeyPool {
 public:
  AuthKeyPool(std::vector<int> bits, int tag_width);

  int tag_width() const { return tag_width_; }
  std::size_t offset() const { return next_; }           // bits consumed so far
  std::size_t remaining() const { return bits_.size() - next_; }

  // Append fresh bits taken from an established secret key. The donor key
  // marks them consumed, so the same bits can never be spent twice.
  void replenish(SecretKey& source, int nbits);

  // Exposed for tests: pools for both parties must hold identical bits.
  const std::vector<int>& bits() const { return bits_; }

 private:
  friend struct TagResult;
  friend TagResult tag_message(AuthKeyPool& pool, std::string_view message);
  friend VerifyStatus verify_tag(AuthKeyPool& pool, std::string_view message, const Tag& tag,
                                 std::size_t claimed_offset);

  std::uint64_t draw_bits(int count);  // throws KeyExhaustedError
  void ensure_epoch_key();

  std::vector<int> bits_;
  std::size_t next_ = 0;
  int tag_width_;
  bool have_poly_key_ = false;
  f89::u128 poly_key_ = 0;
};

struct TagResult {
  Tag tag;
  std::size_t key_offset;  // pool offset before the mask draw; sent alongside
  int bits_consumed;
};

// Tag an outgoing message, consuming pool bits.
TagResult tag_message(AuthKeyPool& pool, std::string_view message);

// Verify an incoming (message, tag, offset) triple against the receiver's
// pool. claimed_offset behind the pool means a replayed stale message:
// Reject without consuming anything. claimed_offset ahead of the pool means
// the receiver missed traffic: PoolDesyncError. At the matching offset the
// mask bits are consumed and the recomputed tag is compared.
VerifyStatus verify_tag(AuthKeyPool& pool, std::string_view message, const Tag& tag,
                        std::size_t claimed_offset);

// Unmasked truncated polynomial hash; exposed so tests can measure collision
// rates of the hash itself. Words are `width`-bit little-endian groups of
// message bytes, preceded by the byte length, folded by Horner's rule with a
// closing multiply so every word carries a key exponent of at least one.
std::uint64_t poly_hash_truncated(f89::u128 key, std::string_view message, int width);

// Convenience: n independent uniform bits.
std::vector<int> random_bits(int n, RandomSource& rng);

}  // namespace qcrypt
