#pragma once

#include <cstddef>

namespace lrei::audit {

// Registry of live N x r factor blocks held by the integrator's stage
// representation (state factors, RHS factors, assembly workspace). The
// Lanczos basis is not registered; its N x m footprint is fixed by the
// solver options. Used to verify that stage sums are never flattened.
void block_acquired();
void block_released();
long live_blocks();
long peak_blocks();
void reset_blocks();

// Largest single heap allocation observed, in bytes. Fed by an optional
// operator-new override in test binaries; 0 when no override is linked.
void record_alloc(std::size_t bytes);
std::size_t max_alloc_bytes();
void reset_alloc();

// RAII tag for one factor block.
class BlockTag {
 public:
  BlockTag() { block_acquired(); }
  BlockTag(const BlockTag&) { block_acquired(); }
  BlockTag(BlockTag&& other) noexcept { other.owned_ = false; }
  BlockTag& operator=(const BlockTag&) { return *this; }
  BlockTag& operator=(BlockTag&& other) noexcept {
    if (this != &other) {
      if (owned_) block_released();
      owned_ = other.owned_;
      other.owned_ = false;
    }
    return *this;
  }
  ~BlockTag() {
    if (owned_) block_released();
  }

 private:
  bool owned_ = true;
};

}  // namespace lrei::audit
