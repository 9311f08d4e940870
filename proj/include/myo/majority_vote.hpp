#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace myo {

/// Output smoothing over the last `window` predictions.
///
/// Emits the modal label of the buffer. On a tie the previously emitted label
/// is kept if it is one of the tied modes; otherwise the lowest tied label
/// wins. The emitted label is always present in the buffer.
class MajorityVote {
 public:
  explicit MajorityVote(std::size_t window = 5);

  int push(int label);
  void reset();

  std::size_t window() const { return window_; }
  std::size_t size() const { return filled_; }
  std::optional<int> last_emitted() const { return last_; }
  /// Buffer contents, oldest first.
  std::vector<int> contents() const;

 private:
  std::size_t window_;
  std::vector<int> ring_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::optional<int> last_;
};

}  // namespace myo
