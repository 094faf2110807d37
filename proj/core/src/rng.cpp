#include "nid/rng.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

#include "nid/errors.hpp"

namespace nid {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Rng::derive_seed(std::uint64_t root, std::string_view stream) {
  std::uint64_t z = root ^ fnv1a64(stream);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
std::string join_ids(const std::vector<std::size_t>& ids) {
  std::ostringstream os;
  os << "id sets differ:";
  const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) os << ' ' << ids[i];
  if (ids.size() > shown) os << " ... (" << ids.size() << " total)";
  return os.str();
}
}  // namespace

IdMismatch::IdMismatch(std::vector<std::size_t> ids) : Error(join_ids(ids)), ids_(std::move(ids)) {}

}  // namespace nid
