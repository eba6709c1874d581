// Copyright 2026 The IEFS-GMB Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

#include "iefs/errors.hpp"

// Little-endian byte buffers for the dataset and checkpoint formats.

namespace iefs {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class ByteWriter {
 public:
  template <class T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf_.append(raw, sizeof(T));
  }
  void put_bytes(std::string_view bytes) { buf_.append(bytes); }
  void put_u8(std::uint8_t v) { put(v); }
  void put_u16(std::uint16_t v) { put(v); }
  void put_u32(std::uint32_t v) { put(v); }

  const std::string& bytes() const { return buf_; }
  std::string release() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get(const char* what) {
    require(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }
  std::uint8_t get_u8(const char* what) { return get<std::uint8_t>(what); }
  std::uint16_t get_u16(const char* what) { return get<std::uint16_t>(what); }
  std::uint32_t get_u32(const char* what) { return get<std::uint32_t>(what); }

  std::string_view get_bytes(std::size_t n, const char* what) {
    require(n, what);
    auto out = bytes_.substr(offset_, n);
    offset_ += n;
    return out;
  }

  void require(std::size_t n, const char* what) const {
    if (bytes_.size() - offset_ < n) {
      throw ParseError(std::string("truncated input while reading ") + what, offset_);
    }
  }

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  std::string_view bytes_;
  std::size_t offset_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace iefs
