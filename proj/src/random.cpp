#include "qcrypt/random.hpp"

#include <stdexcept>

namespace qcrypt {

int RandomSource::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  int k = static_cast<int>(uniform01() * n);
  return k >= n ? n - 1 : k;  // guards u so close to 1 that u*n rounds up
}

std::vector<int> RandomSource::sample_without_replacement(int n, int k) {
  if (n < 0 || k < 0 || k > n)
    throw std::invalid_argument("sample_without_replacement: need 0 <= k <= n");
  std::vector<int> pool;
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.push_back(i);
  std::vector<int> picked;
  picked.reserve(k);
  for (int round = 0; round < k; ++round) {
    int j = uniform_int(static_cast<int>(pool.size()));
    picked.push_back(pool[j]);
    pool.erase(pool.begin() + j);
  }
  return picked;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

}  // namespace qcrypt
