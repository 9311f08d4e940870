#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace myo {

/// Plain-text `key=value` configuration. Blank lines and `#` comments are
/// ignored; later duplicates override earlier ones. Serialization emits keys in
/// sorted order so equal configs produce equal bytes.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text);
  static KeyValues load(const std::string& path);

  void set(std::string key, std::string value);
  void set(std::string key, double value);
  void set(std::string key, long long value);
  void set(std::string key, int value) { set(std::move(key), static_cast<long long>(value)); }
  void set(std::string key, std::uint64_t value);

  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  std::string get_string(std::string_view key, std::string fallback) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

  std::string to_string() const;
  void save(const std::string& path) const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace myo
