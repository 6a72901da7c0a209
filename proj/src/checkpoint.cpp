#include "emojipred/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "emojipred/common.hpp"

namespace emojipred::checkpoint {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in host order");

using json = nlohmann::json;

void Writer::add_raw(const std::string& name, const char* dtype, const void* data,
                     std::size_t count, std::size_t elem_size) {
  blobs_.push_back({{"name", name}, {"dtype", dtype}, {"count", count}});
  payload_.append(static_cast<const char*>(data), count * elem_size);
}

void Writer::add(const std::string& name, std::span<const float> data) {
  add_raw(name, "f32", data.data(), data.size(), sizeof(float));
}

void Writer::add(const std::string& name, std::span<const double> data) {
  add_raw(name, "f64", data.data(), data.size(), sizeof(double));
}

void Writer::add(const std::string& name, std::span<const std::int32_t> data) {
  add_raw(name, "i32", data.data(), data.size(), sizeof(std::int32_t));
}

void Writer::write(const std::filesystem::path& path) const {
  json header = header_;
  header["blobs"] = blobs_;
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write checkpoint: " + path.string());
  const std::uint32_t version = kVersion;
  const std::uint64_t len = text.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload_.data(), static_cast<std::streamsize>(payload_.size()));
  if (!out) throw MissingResourceError("failed writing checkpoint: " + path.string());
}

Reader Reader::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingResourceError("cannot read checkpoint: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t kPrefix = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);
  if (bytes.size() < kPrefix || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ConsistencyError("not a checkpoint file: " + path.string());
  }
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  std::memcpy(&version, bytes.data() + sizeof(kMagic), sizeof(version));
  std::memcpy(&len, bytes.data() + sizeof(kMagic) + sizeof(version), sizeof(len));
  if (version != kVersion) {
    throw ConsistencyError("unsupported checkpoint version " + std::to_string(version));
  }
  if (bytes.size() < kPrefix + len) throw ConsistencyError("truncated checkpoint: " + path.string());

  Reader r;
  r.path_ = path.string();
  r.header_ = json::parse(bytes.substr(kPrefix, len), nullptr, false);
  if (r.header_.is_discarded()) throw ConsistencyError("corrupt checkpoint header: " + r.path_);
  r.payload_ = bytes.substr(kPrefix + len);
  std::size_t offset = 0;
  for (const auto& blob : r.header_.at("blobs")) {
    Entry e;
    e.dtype = blob.at("dtype").get<std::string>();
    e.count = blob.at("count").get<std::size_t>();
    e.offset = offset;
    const std::size_t elem = e.dtype == "f64" ? 8 : 4;
    offset += e.count * elem;
    r.entries_.emplace_back(blob.at("name").get<std::string>(), e);
  }
  if (offset != r.payload_.size()) throw ConsistencyError("checkpoint payload size mismatch: " + r.path_);
  return r;
}

const Reader::Entry& Reader::find(const std::string& name, const char* dtype) const {
  for (const auto& [n, e] : entries_) {
    if (n == name) {
      if (e.dtype != dtype) {
        throw ConsistencyError("blob '" + name + "' has dtype " + e.dtype + ", expected " + dtype);
      }
      return e;
    }
  }
  throw ConsistencyError("checkpoint " + path_ + " has no blob '" + name + "'");
}

namespace {

template <typename T>
std::vector<T> copy_out(const std::string& payload, std::size_t offset, std::size_t count) {
  std::vector<T> out(count);
  if (count) std::memcpy(out.data(), payload.data() + offset, count * sizeof(T));
  return out;
}

}  // namespace

std::vector<float> Reader::f32(const std::string& name) const {
  const auto& e = find(name, "f32");
  return copy_out<float>(payload_, e.offset, e.count);
}

std::vector<double> Reader::f64(const std::string& name) const {
  const auto& e = find(name, "f64");
  return copy_out<double>(payload_, e.offset, e.count);
}

std::vector<std::int32_t> Reader::i32(const std::string& name) const {
  const auto& e = find(name, "i32");
  return copy_out<std::int32_t>(payload_, e.offset, e.count);
}

}  // namespace emojipred::checkpoint
