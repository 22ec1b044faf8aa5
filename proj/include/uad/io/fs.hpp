#ifndef UAD_IO_FS_HPP
#define UAD_IO_FS_HPP

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "uad/core/error.hpp"

namespace uad::io {

namespace fs = std::filesystem;

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_text(const fs::path& path) {
  const auto b = read_bytes(path);
  return {b.begin(), b.end()};
}

/// Writes to a sibling temp file and renames it over `path`, so readers never
/// observe a partially written file.
inline void atomic_write(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("io", "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void atomic_write(const fs::path& path, const std::string& text) {
  atomic_write(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Exclusive advisory lock on `<path>.lock`, released on destruction.
class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const std::string lock = path.string() + ".lock";
    fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw Error("io", "cannot open lock " + lock);
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error("io", "cannot lock " + lock);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

/// `p` resolved against `base` unless already absolute.
inline fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace uad::io

#endif  // UAD_IO_FS_HPP
