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

#include "auralab/common.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace auralab {

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<unsigned char> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  in.seekg(0, std::ios::end);
  std::vector<unsigned char> buf(static_cast<size_t>(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw IoError("read failed: " + path.string());
  return buf;
}

void write_binary_file(const fs::path& path, const void* data, size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

bool pid_alive(long pid) {
  return fs::exists("/proc/" + std::to_string(pid));
}

}  // namespace

DirLock::DirLock(const fs::path& dir) {
  fs::create_directories(dir);
  lock_path_ = dir / ".lock";
  for (int attempt = 0; attempt < 2; ++attempt) {
    int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      std::string pid = std::to_string(static_cast<long>(::getpid())) + "\n";
      ssize_t rc = ::write(fd, pid.data(), pid.size());
      (void)rc;
      ::close(fd);
      held_ = true;
      return;
    }
    // Lock exists; reclaim it if the owning process is gone.
    long owner = -1;
    try {
      owner = std::stol(read_text_file(lock_path_));
    } catch (...) {
    }
    if (owner > 0 && pid_alive(owner)) {
      throw IoError("output directory is locked by pid " + std::to_string(owner) + ": " +
                    lock_path_.string());
    }
    std::error_code ec;
    fs::remove(lock_path_, ec);
  }
  throw IoError("could not acquire lock: " + lock_path_.string());
}

DirLock::~DirLock() {
  if (held_) {
    std::error_code ec;
    fs::remove(lock_path_, ec);
  }
}

}  // namespace auralab
