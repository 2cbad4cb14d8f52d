// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/shot_file.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "rase/error.hpp"

namespace rase {

namespace {

template <typename T>
void put_le(std::vector<char>& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint64_t bits = 0;
  if constexpr (sizeof(T) == 8)
    bits = std::bit_cast<std::uint64_t>(value);
  else
    bits = static_cast<std::uint64_t>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint64_t get_le_bits(const unsigned char* p, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_le_bits(p, 8)); }

[[noreturn]] void format_error(const std::string& path, std::uint64_t offset,
                               const std::string& what) {
  std::ostringstream os;
  os << path << ": " << what << " at byte offset " << offset;
  fail(ErrorKind::Format, os.str());
}

std::vector<char> encode_header(const ShotFileHeader& h) {
  std::vector<char> buf;
  buf.insert(buf.end(), kShotFileMagic, kShotFileMagic + 8);
  put_le<std::uint32_t>(buf, kShotFileVersion);
  put_le<double>(buf, h.sample_rate);
  put_le<std::uint32_t>(buf, h.n_shots);
  put_le<std::uint32_t>(buf, h.n_samples);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(h.windows.size()));
  for (const auto& w : h.windows) {
    char name[16] = {};
    std::memcpy(name, w.label.data(), std::min<std::size_t>(16, w.label.size()));
    buf.insert(buf.end(), name, name + 16);
    put_le<std::uint64_t>(buf, w.start);
    put_le<std::uint64_t>(buf, w.end);
  }
  return buf;
}

void validate_windows(const ShotFileHeader& h, const std::string& path) {
  try {
    (void)h.timeline();
  } catch (const Error& e) {
    fail(ErrorKind::Format, path + ": bad window table: " + e.what());
  }
}

}  // namespace

ShotFileWriter::ShotFileWriter(const std::string& path, ShotFileHeader header)
    : path_(path), header_(std::move(header)) {
  for (const auto& w : header_.windows)
    if (w.label.size() > 16)
      fail(ErrorKind::Config, "window label '" + w.label + "' exceeds 16 bytes");
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) fail(ErrorKind::Io, "cannot open '" + path_ + "' for writing");
  auto hdr = encode_header(header_);
  out_.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  buffer_.reserve(header_.shot_bytes());
}

ShotFileWriter::~ShotFileWriter() {
  if (out_.is_open()) out_.close();
}

void ShotFileWriter::append(const HeterodyneRecord& record) {
  if (written_ >= header_.n_shots)
    fail(ErrorKind::Config, "more shots appended than declared in the header");
  if (record.samples.size() != header_.n_samples)
    fail(ErrorKind::Config, "record length does not match header n_samples");
  buffer_.clear();
  for (const auto& s : record.samples) {
    put_le<double>(buffer_, s.real());
    put_le<double>(buffer_, s.imag());
  }
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out_) fail(ErrorKind::Io, "write failed on '" + path_ + "'");
  ++written_;
}

void ShotFileWriter::close() {
  if (!out_.is_open()) return;
  out_.close();
  if (written_ != header_.n_shots) {
    std::ostringstream os;
    os << path_ << ": " << written_ << " shots written, header declares "
       << header_.n_shots;
    fail(ErrorKind::Io, os.str());
  }
}

ShotFileReader::ShotFileReader(const std::string& path) : path_(path) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) fail(ErrorKind::Format, "cannot open shot file '" + path_ + "'");
  std::error_code ec;
  const std::uint64_t file_size = std::filesystem::file_size(path_, ec);
  if (ec) fail(ErrorKind::Format, "cannot stat shot file '" + path_ + "'");

  unsigned char fixed[32];
  in.read(reinterpret_cast<char*>(fixed), 32);
  if (in.gcount() < 8 || std::memcmp(fixed, kShotFileMagic, 8) != 0)
    format_error(path_, 0, "bad magic (expected RASEHET1)");
  if (in.gcount() < 32) format_error(path_, in.gcount(), "truncated fixed header");
  const auto version = static_cast<std::uint32_t>(get_le_bits(fixed + 8, 4));
  if (version != kShotFileVersion) {
    std::ostringstream os;
    os << "unsupported format version " << version;
    format_error(path_, 8, os.str());
  }
  header_.sample_rate = get_f64(fixed + 12);
  header_.n_shots = static_cast<std::uint32_t>(get_le_bits(fixed + 20, 4));
  header_.n_samples = static_cast<std::uint32_t>(get_le_bits(fixed + 24, 4));
  const auto n_windows = static_cast<std::uint32_t>(get_le_bits(fixed + 28, 4));
  if (!(header_.sample_rate > 0.0)) format_error(path_, 12, "sample rate must be > 0");
  if (32ull + 32ull * n_windows > file_size)
    format_error(path_, 28, "window table extends past end of file");

  for (std::uint32_t w = 0; w < n_windows; ++w) {
    unsigned char entry[32];
    in.read(reinterpret_cast<char*>(entry), 32);
    if (in.gcount() != 32) format_error(path_, 32 + 32ull * w, "truncated window table");
    const char* name = reinterpret_cast<const char*>(entry);
    Window win;
    win.label.assign(name, strnlen(name, 16));
    win.start = get_le_bits(entry + 16, 8);
    win.end = get_le_bits(entry + 24, 8);
    header_.windows.push_back(std::move(win));
  }
  validate_windows(header_, path_);

  if (file_size != header_.total_bytes()) {
    std::ostringstream os;
    os << "payload length mismatch: expected " << header_.total_bytes()
       << " bytes in total, file has " << file_size;
    format_error(path_, std::min(file_size, header_.total_bytes()), os.str());
  }
}

HeterodyneRecord ShotFileReader::read_shot(std::uint32_t index) const {
  auto v = read_range(index, 1);
  return std::move(v.front());
}

std::vector<HeterodyneRecord> ShotFileReader::read_range(std::uint32_t first,
                                                         std::uint32_t count) const {
  if (static_cast<std::uint64_t>(first) + count > header_.n_shots)
    fail(ErrorKind::Format, "shot index out of range");
  std::ifstream in(path_, std::ios::binary);
  if (!in) fail(ErrorKind::Format, "cannot open shot file '" + path_ + "'");
  const std::uint64_t offset = header_.header_bytes() + header_.shot_bytes() * first;
  in.seekg(static_cast<std::streamoff>(offset));
  std::vector<unsigned char> buf(header_.shot_bytes());
  std::vector<HeterodyneRecord> out;
  out.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::uint64_t>(in.gcount()) != buf.size())
      format_error(path_, offset + header_.shot_bytes() * s, "truncated payload");
    HeterodyneRecord rec;
    rec.sample_rate = header_.sample_rate;
    rec.windows = header_.windows;
    rec.shot_index = first + s;
    rec.samples.resize(header_.n_samples);
    for (std::uint32_t i = 0; i < header_.n_samples; ++i)
      rec.samples[i] = Sample(get_f64(&buf[16ull * i]), get_f64(&buf[16ull * i + 8]));
    out.push_back(std::move(rec));
  }
  return out;
}

void write_shot_file(const std::string& path, const std::vector<HeterodyneRecord>& shots) {
  if (shots.empty()) fail(ErrorKind::Config, "no shots to write");
  ShotFileHeader h;
  h.sample_rate = shots.front().sample_rate;
  h.n_shots = static_cast<std::uint32_t>(shots.size());
  h.n_samples = static_cast<std::uint32_t>(shots.front().samples.size());
  h.windows = shots.front().windows;
  ShotFileWriter w(path, h);
  for (const auto& s : shots) w.append(s);
  w.close();
}

std::vector<HeterodyneRecord> read_shot_file(const std::string& path) {
  ShotFileReader r(path);
  return r.read_range(0, r.n_shots());
}

void export_shots_csv(const std::string& path, const std::vector<HeterodyneRecord>& shots) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "shot,sample,time_us,window,re,im\n";
  out << std::setprecision(17);
  for (const auto& rec : shots) {
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
      const char* name = "";
      for (const auto& w : rec.windows)
        if (w.contains(i)) name = w.label.c_str();
      out << rec.shot_index << ',' << i << ',' << 1e6 * i / rec.sample_rate << ','
          << name << ',' << rec.samples[i].real() << ',' << rec.samples[i].imag()
          << '\n';
    }
  }
  if (!out) fail(ErrorKind::Io, "write failed on '" + path + "'");
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "' for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

}  // namespace rase
