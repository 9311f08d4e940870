#include "myo/kv_config.hpp"

#include <charconv>

#include "myo/error.hpp"
#include "myo/text_format.hpp"

namespace myo {

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  for (auto line : text::split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected key=value on line " + std::to_string(line_no));
    auto key = text::trim(line.substr(0, eq));
    auto value = text::trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("empty key on line " + std::to_string(line_no));
    kv.entries_[std::string(key)] = std::string(value);
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  return parse(text::read_file(path));
}

void KeyValues::set(std::string key, std::string value) {
  entries_[std::move(key)] = std::move(value);
}

void KeyValues::set(std::string key, double value) {
  entries_[std::move(key)] = text::format_double(value);
}

void KeyValues::set(std::string key, long long value) {
  entries_[std::move(key)] = std::to_string(value);
}

void KeyValues::set(std::string key, std::uint64_t value) {
  entries_[std::move(key)] = std::to_string(value);
}

bool KeyValues::contains(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

std::optional<std::string> KeyValues::get(std::string_view key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

double KeyValues::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  return v ? text::to_double(*v, key) : fallback;
}

long long KeyValues::get_int(std::string_view key, long long fallback) const {
  auto v = get(key);
  return v ? text::to_int(*v, key) : fallback;
}

std::uint64_t KeyValues::get_u64(std::string_view key, std::uint64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto s = text::trim(*v);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("cannot parse unsigned " + std::string(key) + " from '" + *v + "'");
  return out;
}

std::string KeyValues::get_string(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::string KeyValues::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

void KeyValues::save(const std::string& path) const {
  text::write_file(path, to_string());
}

}  // namespace myo
