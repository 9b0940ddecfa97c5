#include "ledgerlab/primitives/merkle.hpp"

namespace ledgerlab {

Digest empty_merkle_root() { return digest(ByteView{}); }

Digest merkle_root(std::span<const Digest> leaves) {
  if (leaves.empty()) return empty_merkle_root();
  if (leaves.size() == 1) return digest(ByteView(leaves[0].bytes));

  std::vector<Digest> level(leaves.begin(), leaves.end());
  while (level.size() > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) level[out++] = digest_pair(level[i], level[i + 1]);
    if (level.size() % 2 == 1) level[out++] = level.back();
    level.resize(out);
  }
  return level.front();
}

}  // namespace ledgerlab
