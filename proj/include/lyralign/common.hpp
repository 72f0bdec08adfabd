// include/lyralign/common.hpp

// Copyright 2026  lyralign authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lyralign {

enum class ErrorKind {
  kValidation,  // bad input values or contract violations
  kFormat,      // malformed file contents
  kIo,          // filesystem failures
  kInfeasible,  // no valid alignment/path exists
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &msg) {
  throw Error(kind, msg);
}

/// Dense row-major matrix of doubles. Used for logits and gradients.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  const double *row(std::size_t r) const { return data.data() + r * cols; }
  double *row(std::size_t r) { return data.data() + r * cols; }

  bool operator==(const Matrix &) const = default;
};

// Splits UTF-8 text into code points, each returned as its own string.
inline std::vector<std::string> SplitUtf8(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    else if (lead >= 0x80)
      Fail(ErrorKind::kFormat,
           "invalid UTF-8 lead byte at offset " + std::to_string(i));
    if (i + len > text.size())
      Fail(ErrorKind::kFormat, "truncated UTF-8 sequence at offset " +
                                   std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80)
        Fail(ErrorKind::kFormat,
             "invalid UTF-8 continuation byte at offset " +
                 std::to_string(i + k));
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

inline std::string ReadTextFile(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) Fail(ErrorKind::kIo, "read failed: " + path.string());
  return ss.str();
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`, so a
/// failed run never leaves a partial output behind.
inline void WriteFileAtomic(const std::filesystem::path &path,
                            std::string_view bytes) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) Fail(ErrorKind::kIo, "cannot open for writing: " + tmp.string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) Fail(ErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    Fail(ErrorKind::kIo, "cannot rename into " + path.string());
  }
}

namespace detail {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T ByteSwapIfBig(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

// Little-endian append-only byte sink.
class ByteWriter {
 public:
  template <typename T>
  void Put(T v) {
    v = ByteSwapIfBig(v);
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf_.append(b, sizeof(T));
  }
  void PutBytes(std::string_view s) { buf_.append(s); }
  const std::string &str() const { return buf_; }

 private:
  std::string buf_;
};

// Little-endian cursor over an in-memory buffer; throws kFormat on overrun.
class ByteReader {
 public:
  ByteReader(std::string_view buf, std::string what)
      : buf_(buf), what_(std::move(what)) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return ByteSwapIfBig(v);
  }
  std::string_view GetBytes(std::size_t n) {
    Need(n);
    auto s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (buf_.size() - pos_ < n)
      Fail(ErrorKind::kFormat, what_ + ": truncated payload");
  }
  std::string_view buf_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace detail
}  // namespace lyralign
