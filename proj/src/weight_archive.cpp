// Copyright 2026 The Auralab Authors.
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

#include "auralab/weight_archive.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace auralab {

using nlohmann::json;

void WeightArchive::put(const std::string& name, std::vector<int> shape,
                        std::vector<float> data) {
  if (!tensors.count(name)) order.push_back(name);
  tensors[name] = Entry{std::move(shape), std::move(data)};
}

void save_archive(const WeightArchive& a, const fs::path& dir) {
  fs::create_directories(dir);
  json index;
  index["format_version"] = 1;
  index["dtype"] = "float32";
  index["provenance"] = a.provenance;
  json tensors = json::array();
  std::ofstream bin(dir / "weights.bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw IoError("cannot write " + (dir / "weights.bin").string());
  size_t offset = 0;
  for (const std::string& name : a.order) {
    const auto& e = a.tensors.at(name);
    size_t bytes = e.data.size() * sizeof(float);
    bin.write(reinterpret_cast<const char*>(e.data.data()), static_cast<std::streamsize>(bytes));
    json t;
    t["name"] = name;
    t["shape"] = e.shape;
    t["dtype"] = "float32";
    t["byte_offset"] = offset;
    t["byte_length"] = bytes;
    tensors.push_back(std::move(t));
    offset += bytes;
  }
  if (!bin) throw IoError("write failed: " + (dir / "weights.bin").string());
  bin.close();
  index["tensors"] = std::move(tensors);
  write_text_file(dir / "archive.json", index.dump(2) + "\n");
}

WeightArchive load_archive(const fs::path& dir) {
  fs::path index_path = dir / "archive.json";
  if (!fs::exists(index_path))
    throw IoError("weight archive index not found: " + index_path.string());
  json index = json::parse(read_text_file(index_path));
  std::vector<unsigned char> bin = read_binary_file(dir / "weights.bin");
  WeightArchive a;
  a.provenance = index.value("provenance", "");
  for (const auto& t : index.at("tensors")) {
    std::string name = t.at("name").get<std::string>();
    std::vector<int> shape = t.at("shape").get<std::vector<int>>();
    size_t offset = t.at("byte_offset").get<size_t>();
    size_t bytes = t.at("byte_length").get<size_t>();
    if (offset + bytes > bin.size())
      throw IntegrityError("weight archive tensor '" + name + "' overruns weights.bin");
    std::vector<float> data(bytes / sizeof(float));
    std::memcpy(data.data(), bin.data() + offset, bytes);
    size_t expect = 1;
    for (int d : shape) expect *= static_cast<size_t>(d);
    if (expect != data.size())
      throw IntegrityError("weight archive tensor '" + name + "' shape/body mismatch");
    a.put(name, std::move(shape), std::move(data));
  }
  return a;
}

namespace {

// Minimal NPY v1/v2 reader, little-endian float32/float64 only.
WeightArchive::Entry read_npy(const fs::path& path) {
  std::vector<unsigned char> buf = read_binary_file(path);
  if (buf.size() < 10 || std::memcmp(buf.data(), "\x93NUMPY", 6) != 0)
    throw DecodeError("not an NPY file: " + path.string());
  int major = buf[6];
  size_t header_len, header_off;
  if (major == 1) {
    header_len = buf[8] | (buf[9] << 8);
    header_off = 10;
  } else {
    header_len = buf[8] | (buf[9] << 8) | (buf[10] << 16) | (static_cast<size_t>(buf[11]) << 24);
    header_off = 12;
  }
  std::string header(reinterpret_cast<const char*>(buf.data() + header_off), header_len);
  auto find_value = [&](const std::string& key) -> std::string {
    size_t k = header.find("'" + key + "'");
    if (k == std::string::npos) throw DecodeError("NPY header missing " + key + ": " + path.string());
    size_t colon = header.find(':', k);
    size_t end = colon + 1;
    int depth = 0;
    while (end < header.size()) {
      char c = header[end];
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (depth == 0 && (c == ',' || c == '}')) break;
      ++end;
    }
    std::string v = header.substr(colon + 1, end - colon - 1);
    v.erase(std::remove_if(v.begin(), v.end(), [](char c) { return c == ' ' || c == '\''; }),
            v.end());
    return v;
  };
  std::string descr = find_value("descr");
  std::string fortran = find_value("fortran_order");
  std::string shape_s = find_value("shape");
  if (fortran != "False")
    throw DecodeError("NPY fortran_order arrays are not supported: " + path.string());
  bool f8 = descr == "<f8";
  if (!f8 && descr != "<f4")
    throw DecodeError("NPY dtype " + descr + " unsupported (want <f4 or <f8): " + path.string());
  std::vector<int> shape;
  std::string digits;
  for (char c : shape_s + ",") {
    if (isdigit(static_cast<unsigned char>(c))) {
      digits += c;
    } else if (!digits.empty()) {
      shape.push_back(std::stoi(digits));
      digits.clear();
    }
  }
  if (shape.empty()) shape.push_back(1);
  size_t count = 1;
  for (int d : shape) count *= static_cast<size_t>(d);
  size_t body = header_off + header_len;
  size_t elem = f8 ? 8 : 4;
  if (body + count * elem > buf.size())
    throw DecodeError("NPY body shorter than declared shape: " + path.string());
  std::vector<float> data(count);
  if (f8) {
    for (size_t i = 0; i < count; ++i) {
      double d;
      std::memcpy(&d, buf.data() + body + i * 8, 8);
      data[i] = static_cast<float>(d);
    }
  } else {
    std::memcpy(data.data(), buf.data() + body, count * 4);
  }
  return {std::move(shape), std::move(data)};
}

}  // namespace

WeightArchive import_npy_dir(const fs::path& npy_dir, const std::string& provenance) {
  if (!fs::is_directory(npy_dir)) throw IoError("not a directory: " + npy_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(npy_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".npy") files.push_back(entry.path());
  }
  if (files.empty()) throw IoError("no .npy files in " + npy_dir.string());
  std::sort(files.begin(), files.end());
  WeightArchive a;
  a.provenance = provenance;
  for (const fs::path& f : files) {
    auto entry = read_npy(f);
    a.put(f.stem().string(), std::move(entry.shape), std::move(entry.data));
  }
  return a;
}

}  // namespace auralab
