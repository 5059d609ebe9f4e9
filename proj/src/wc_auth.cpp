#include "qcrypt/wc_auth.hpp"

#include <stdexcept>

#include "qcrypt/bb84.hpp"

namespace qcrypt {

namespace f89 {

namespace {
constexpr int kFieldBits = 89;
constexpr u128 kMask89 = (u128(1) << kFieldBits) - 1;  // = 2^89 - 1 = the modulus
}  // namespace

u128 modulus() { return kMask89; }

u128 reduce(u128 x) {
  // 2^89 = 1 (mod p), so fold the high bits down. Two folds bring any
  // 128-bit value under 2^90; then a conditional subtract finishes.
  x = (x & kMask89) + (x >> kFieldBits);
  x = (x & kMask89) + (x >> kFieldBits);
  if (x >= kMask89) x -= kMask89;
  return x;
}

u128 add(u128 a, u128 b) {
  u128 s = a + b;
  if (s >= kMask89) s -= kMask89;
  return s;
}

u128 mul(u128 a, u128 b) {
  // Split both operands at 45 bits so every partial product fits in 128
  // bits: a = a1*2^45 + a0, b likewise, with a1, b1 < 2^44.
  constexpr int half = 45;
  constexpr u128 lo_mask = (u128(1) << half) - 1;
  u128 a0 = a & lo_mask, a1 = a >> half;
  u128 b0 = b & lo_mask, b1 = b >> half;

  u128 hi = a1 * b1;        // < 2^88, carries weight 2^90 = 2 (mod p)
  u128 mid = a1 * b0 + a0 * b1;  // < 2^90, carries weight 2^45
  u128 lo = a0 * b0;        // < 2^90

  u128 mid_hi = mid >> (kFieldBits - half);              // weight 2^89 = 1
  u128 mid_lo = (mid & ((u128(1) << (kFieldBits - half)) - 1)) << half;

  u128 acc = reduce(lo);
  acc = add(acc, reduce(hi << 1));
  acc = add(acc, reduce(mid_hi));
  acc = add(acc, reduce(mid_lo));
  return acc;
}

}  // namespace f89

std::string Tag::hex() const {
  static const char* digits = "0123456789abcdef";
  int nibbles = (width + 3) / 4;
  std::string out(nibbles, '0');
  for (int i = 0; i < nibbles; ++i)
    out[nibbles - 1 - i] = digits[(value >> (4 * i)) & 0xf];
  return out;
}

Tag Tag::from_hex(const std::string& h, int width) {
  std::uint64_t v = 0;
  for (char c : h) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw std::invalid_argument("Tag::from_hex: bad digit");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  if (width < 64) v &= (std::uint64_t(1) << width) - 1;
  return Tag{v, width};
}

AuthKeyPool::AuthKeyPool(std::vector<int> bits, int tag_width)
    : bits_(std::move(bits)), tag_width_(tag_width) {
  if (tag_width_ < 1 || tag_width_ > 64)
    throw std::invalid_argument("AuthKeyPool: tag width must be in [1, 64]");
  for (int b : bits_)
    if (b != 0 && b != 1) throw std::invalid_argument("AuthKeyPool: bits must be 0/1");
}

std::uint64_t AuthKeyPool::draw_bits(int count) {
  if (remaining() < static_cast<std::size_t>(count))
    throw KeyExhaustedError("authentication pool exhausted");
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(bits_[next_++]);
  return v;
}

void AuthKeyPool::ensure_epoch_key() {
  if (have_poly_key_) return;
  // 89 bits, most significant first. The all-ones value equals the modulus
  // and reduces to zero, which is still a valid (if weak) key.
  f89::u128 k = 0;
  if (remaining() < 89) throw KeyExhaustedError("authentication pool exhausted");
  for (int i = 0; i < 89; ++i) k = (k << 1) | f89::u128(bits_[next_++]);
  poly_key_ = f89::reduce(k);
  have_poly_key_ = true;
}

void AuthKeyPool::replenish(SecretKey& source, int nbits) {
  std::vector<int> fresh = source.take(nbits);
  bits_.insert(bits_.end(), fresh.begin(), fresh.end());
}

std::uint64_t poly_hash_truncated(f89::u128 key, std::string_view message, int width) {
  if (width < 1 || width > 64) throw std::invalid_argument("poly_hash: width must be in [1, 64]");
  int bytes_per_word = (width + 7) / 8;
  // Horner fold over the length word followed by the message words. The
  // closing multiply matters: it gives every word a key exponent of at least
  // one, so no single-word difference can survive truncation untouched.
  f89::u128 acc = static_cast<f89::u128>(message.size());
  acc = f89::reduce(acc);
  for (std::size_t pos = 0; pos < message.size(); pos += bytes_per_word) {
    std::uint64_t w = 0;
    for (int i = 0; i < bytes_per_word && pos + i < message.size(); ++i)
      w |= static_cast<std::uint64_t>(static_cast<unsigned char>(message[pos + i])) << (8 * i);
    acc = f89::add(f89::mul(acc, key), f89::reduce(w));
  }
  acc = f89::mul(acc, key);
  std::uint64_t mask = width == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << width) - 1;
  return static_cast<std::uint64_t>(acc) & mask;
}

TagResult tag_message(AuthKeyPool& pool, std::string_view message) {
  std::size_t before = pool.offset();
  pool.ensure_epoch_key();
  std::size_t offset = pool.offset();  // receiver sits here after its own epoch draw
  std::uint64_t core = poly_hash_truncated(pool.poly_key_, message, pool.tag_width());
  std::uint64_t mask = pool.draw_bits(pool.tag_width());
  return {Tag{core ^ mask, pool.tag_width()}, offset, static_cast<int>(pool.offset() - before)};
}

VerifyStatus verify_tag(AuthKeyPool& pool, std::string_view message, const Tag& tag,
                        std::size_t claimed_offset) {
  if (tag.width != pool.tag_width()) return VerifyStatus::Reject;
  pool.ensure_epoch_key();
  if (claimed_offset < pool.offset()) return VerifyStatus::Reject;  // stale / replayed
  if (claimed_offset > pool.offset())
    throw PoolDesyncError("authentication pools out of step");
  std::uint64_t core = poly_hash_truncated(pool.poly_key_, message, pool.tag_width());
  std::uint64_t mask = pool.draw_bits(pool.tag_width());
  return (core ^ mask) == tag.value ? VerifyStatus::Accept : VerifyStatus::Reject;
}

std::vector<int> random_bits(int n, RandomSource& rng) {
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) out[i] = rng.bit();
  return out;
}

}  // namespace qcrypt
