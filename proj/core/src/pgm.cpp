#include "semdrive/pgm.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "semdrive/file_util.hpp"

namespace semdrive {

std::string encode_pgm(const SemanticFrame& frame) {
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) +
                    "\n255\n";
  out.reserve(out.size() + frame.pixels.size());
  for (float level : frame.pixels) {
    const long v = std::lround(static_cast<double>(level) * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(v < 0 ? 0 : v > 255 ? 255 : v)));
  }
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      throw std::runtime_error("pgm: malformed header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw std::runtime_error("pgm: header value too large");
      ++pos_;
    }
    return static_cast<int>(value);
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

SemanticFrame decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw std::runtime_error("pgm: missing P5 magic");
  }
  HeaderReader header(bytes);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width < 1 || height < 1) throw std::runtime_error("pgm: empty image");
  if (maxval < 1 || maxval > 255) throw std::runtime_error("pgm: unsupported maxval");
  if (header.pos() >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[header.pos()]))) {
    throw std::runtime_error("pgm: malformed header");
  }
  header.advance();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - header.pos() != count) {
    throw std::runtime_error("pgm: expected " + std::to_string(count) + " pixel bytes, found " +
                             std::to_string(bytes.size() - header.pos()));
  }
  SemanticFrame frame(width, height);
  for (std::size_t i = 0; i < count; ++i) {
    const auto raw = static_cast<unsigned char>(bytes[header.pos() + i]);
    frame.pixels[i] = class_to_gray(gray_to_class(static_cast<double>(raw) / maxval));
  }
  return frame;
}

void write_pgm(const std::filesystem::path& path, const SemanticFrame& frame) {
  write_file_atomic(path, encode_pgm(frame));
}

SemanticFrame read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path));
}

}  // namespace semdrive
