#pragma once

#include <stdexcept>

namespace qcrypt {

// A scripted replay source ran out of predetermined draws.
class ScriptExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One-time key material was offered to a second consumer.
class DoubleSpendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough unconsumed key bits to satisfy a request.
class KeyExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The two parties' authentication pools disagree on their consumption
// offset. Distinct from a tag mismatch: the protocol state itself is broken.
class PoolDesyncError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Classical traffic failed authentication; the session aborts rather than
// continue over a channel someone is rewriting.
class SuppressedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcrypt
