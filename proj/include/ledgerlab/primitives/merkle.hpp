#pragma once

#include <span>
#include <vector>

#include "ledgerlab/primitives/digest.hpp"

namespace ledgerlab {

/// digest of the empty byte string
Digest empty_merkle_root();

/// Adjacent leaves are paired and hashed; an odd node at the end of a level
/// is promoted unchanged. A single leaf hashes to digest(leaf).
Digest merkle_root(std::span<const Digest> leaves);

class MerkleTree {
 public:
  explicit MerkleTree(std::vector<Digest> leaves)
      : leaves_(std::move(leaves)), root_(merkle_root(leaves_)) {}

  const std::vector<Digest>& leaves() const { return leaves_; }
  const Digest& root() const { return root_; }

 private:
  std::vector<Digest> leaves_;
  Digest root_;
};

}  // namespace ledgerlab
