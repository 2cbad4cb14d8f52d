// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// RASEHET1 shot files. All integers and doubles little-endian.
//
//   offset  size  field
//   0       8     magic "RASEHET1"
//   8       4     format version (u32, = 1)
//   12      8     sample_rate (f64, Hz)
//   20      4     n_shots (u32)
//   24      4     n_samples (u32)
//   28      4     n_windows (u32)
//   32      32*W  per window: label (16 bytes ASCII, zero padded),
//                 start_sample (u64), end_sample (u64)
//   ...           payload: n_shots x n_samples x (re f64, im f64), shot-major

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "rase/sequence_synth.hpp"

namespace rase {

inline constexpr char kShotFileMagic[8] = {'R', 'A', 'S', 'E', 'H', 'E', 'T', '1'};
inline constexpr std::uint32_t kShotFileVersion = 1;

struct ShotFileHeader {
  double sample_rate = 0.0;
  std::uint32_t n_shots = 0;
  std::uint32_t n_samples = 0;
  std::vector<Window> windows;

  std::uint64_t header_bytes() const { return 32 + 32 * windows.size(); }
  std::uint64_t shot_bytes() const { return 16ull * n_samples; }
  std::uint64_t total_bytes() const { return header_bytes() + shot_bytes() * n_shots; }
  Timeline timeline() const { return Timeline(windows, n_samples, sample_rate); }
};

/// Single-owner, append-only. close() fails unless exactly n_shots records
/// were appended.
class ShotFileWriter {
 public:
  ShotFileWriter(const std::string& path, ShotFileHeader header);
  ~ShotFileWriter();
  ShotFileWriter(const ShotFileWriter&) = delete;
  ShotFileWriter& operator=(const ShotFileWriter&) = delete;

  void append(const HeterodyneRecord& record);
  void close();

 private:
  std::string path_;
  ShotFileHeader header_;
  std::ofstream out_;
  std::uint32_t written_ = 0;
  std::vector<char> buffer_;
};

/// Validates the header and the exact payload length on open. Reads are
/// independent per call, so concurrent read_shot calls are safe.
class ShotFileReader {
 public:
  explicit ShotFileReader(const std::string& path);

  const ShotFileHeader& header() const { return header_; }
  std::uint32_t n_shots() const { return header_.n_shots; }

  HeterodyneRecord read_shot(std::uint32_t index) const;
  std::vector<HeterodyneRecord> read_range(std::uint32_t first, std::uint32_t count) const;

 private:
  std::string path_;
  ShotFileHeader header_;
};

void write_shot_file(const std::string& path, const std::vector<HeterodyneRecord>& shots);
std::vector<HeterodyneRecord> read_shot_file(const std::string& path);

/// Plain-text debug export: shot,sample,time_us,window,re,im
void export_shots_csv(const std::string& path, const std::vector<HeterodyneRecord>& shots);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace rase
