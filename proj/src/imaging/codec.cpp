#include "eyevis/codec.hpp"

#include <fstream>
#include <iterator>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "eyevis/error.hpp"

namespace eyevis {
namespace {

constexpr std::uint8_t kPngMagic[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= sizeof(kPngMagic) &&
         std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin());
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

// JPEG decoders happily return partially-filled images for truncated streams,
// so require the end-of-image marker.
bool has_jpeg_eoi(std::span<const std::uint8_t> bytes) {
  std::size_t end = bytes.size();
  while (end > 2 && bytes[end - 1] == 0x00) --end;  // tolerate zero padding
  return end >= 4 && bytes[end - 2] == 0xFF && bytes[end - 1] == 0xD9;
}

}  // namespace

ImageFormat detect_format(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return ImageFormat::kPng;
  if (is_jpeg(bytes)) return ImageFormat::kJpeg;
  throw Error(ErrorCode::kInvalidImage, "not a PNG or JPEG image");
}

std::string_view format_extension(ImageFormat format) {
  return format == ImageFormat::kPng ? ".png" : ".jpg";
}

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  const ImageFormat format = detect_format(bytes);
  if (format == ImageFormat::kJpeg && !has_jpeg_eoi(bytes)) {
    throw Error(ErrorCode::kInvalidImage, "truncated JPEG stream");
  }

  cv::Mat decoded;
  try {
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                      const_cast<std::uint8_t*>(bytes.data()));
    decoded = cv::imdecode(raw, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kInvalidImage, std::string("image decode failed: ") + e.what());
  }
  if (decoded.empty() || decoded.type() != CV_8UC3) {
    throw Error(ErrorCode::kInvalidImage, "image decode failed");
  }

  RasterImage out(decoded.cols, decoded.rows);
  for (int y = 0; y < decoded.rows; ++y) {
    const auto* row = decoded.ptr<cv::Vec3b>(y);
    for (int x = 0; x < decoded.cols; ++x) out.at(x, y) = {row[x][2], row[x][1], row[x][0]};
  }
  return out;
}

RasterImage read_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_image(const RasterImage& img, ImageFormat format,
                                       int jpeg_quality) {
  cv::Mat mat(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& p = img.at(x, y);
      row[x] = {p.b, p.g, p.r};
    }
  }
  std::vector<std::uint8_t> out;
  std::vector<int> params;
  if (format == ImageFormat::kJpeg) params = {cv::IMWRITE_JPEG_QUALITY, jpeg_quality};
  if (!cv::imencode(std::string(format_extension(format)), mat, out, params)) {
    throw Error(ErrorCode::kIo, "image encode failed");
  }
  return out;
}

void write_image(const std::filesystem::path& path, const RasterImage& img) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  ImageFormat format;
  if (ext == ".png") {
    format = ImageFormat::kPng;
  } else if (ext == ".jpg" || ext == ".jpeg") {
    format = ImageFormat::kJpeg;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unsupported image extension: " + ext);
  }
  write_file_bytes(path, encode_image(img, format));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

}  // namespace eyevis
