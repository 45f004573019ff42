#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "treepart/error.hpp"

namespace treepart::simrt {

using Bytes = std::vector<std::byte>;

template <class T>
concept Packable = std::is_trivially_copyable_v<T>;

/// Appends trivially copyable values and length-prefixed sequences to a byte buffer.
class ByteWriter {
 public:
  template <Packable T>
  ByteWriter& put(const T& value) {
    const auto* p = reinterpret_cast<const std::byte*>(&value);
    buffer_.insert(buffer_.end(), p, p + sizeof(T));
    return *this;
  }

  template <Packable T>
  ByteWriter& put_span(std::span<const T> values) {
    put<std::uint64_t>(values.size());
    const auto* p = reinterpret_cast<const std::byte*>(values.data());
    buffer_.insert(buffer_.end(), p, p + values.size_bytes());
    return *this;
  }

  template <Packable T>
  ByteWriter& put_vector(const std::vector<T>& values) {
    return put_span(std::span<const T>(values));
  }

  ByteWriter& put_bytes(std::span<const std::byte> bytes) { return put_span(bytes); }

  ByteWriter& put_string(std::string_view text) {
    return put_span(std::span<const char>(text.data(), text.size()));
  }

  std::size_t size() const { return buffer_.size(); }
  Bytes take() { return std::move(buffer_); }

 private:
  Bytes buffer_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <Packable T>
  T get() {
    require(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }

  template <Packable T>
  std::vector<T> get_vector() {
    const auto count = get<std::uint64_t>();
    require(count * sizeof(T));
    std::vector<T> values(count);
    std::memcpy(values.data(), bytes_.data() + offset_, count * sizeof(T));
    offset_ += count * sizeof(T);
    return values;
  }

  Bytes get_bytes() { return get_vector<std::byte>(); }

  std::string get_string() {
    auto chars = get_vector<char>();
    return std::string(chars.begin(), chars.end());
  }

  bool done() const { return offset_ == bytes_.size(); }

 private:
  void require(std::size_t n) const {
    if (offset_ + n > bytes_.size()) {
      throw InvariantViolation("byte reader: truncated buffer");
    }
  }

  std::span<const std::byte> bytes_;
  std::size_t offset_ = 0;
};

inline Bytes to_bytes(std::string_view text) {
  Bytes out(text.size());
  std::memcpy(out.data(), text.data(), text.size());
  return out;
}

inline std::string to_string(std::span<const std::byte> bytes) {
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

}  // namespace treepart::simrt
