#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace emojipred::checkpoint {

// Binary container: 8-byte magic, u32 version, u64 header length, a JSON
// header describing named blobs, then the raw little-endian blob payloads.
inline constexpr char kMagic[8] = {'E', 'M', 'O', 'J', 'I', 'P', 'R', 'D'};
inline constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(nlohmann::json header) : header_(std::move(header)) {}

  void add(const std::string& name, std::span<const float> data);
  void add(const std::string& name, std::span<const double> data);
  void add(const std::string& name, std::span<const std::int32_t> data);

  void write(const std::filesystem::path& path) const;

 private:
  void add_raw(const std::string& name, const char* dtype, const void* data, std::size_t count,
               std::size_t elem_size);

  nlohmann::json header_;
  nlohmann::json blobs_ = nlohmann::json::array();
  std::string payload_;
};

class Reader {
 public:
  static Reader open(const std::filesystem::path& path);

  const nlohmann::json& header() const { return header_; }
  std::vector<float> f32(const std::string& name) const;
  std::vector<double> f64(const std::string& name) const;
  std::vector<std::int32_t> i32(const std::string& name) const;

 private:
  struct Entry {
    std::string dtype;
    std::size_t offset = 0;
    std::size_t count = 0;
  };
  const Entry& find(const std::string& name, const char* dtype) const;

  std::string path_;
  nlohmann::json header_;
  std::vector<std::pair<std::string, Entry>> entries_;
  std::string payload_;
};

}  // namespace emojipred::checkpoint
