#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lqelab/rates.hpp"

namespace lqelab {

class ProfileParseError : public std::runtime_error {
 public:
  ProfileParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) +
                           ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct BinRecord {
  std::uint32_t tx = 0;   // transmission attempts observed in this bin
  std::uint32_t ack = 0;  // acknowledged attempts
  double pdr = 0.0;       // smoothed delivery ratio estimate
};

struct BinKey {
  int rate_index;
  int snr_bin;
  friend bool operator<(const BinKey& a, const BinKey& b) {
    if (a.rate_index != b.rate_index) return a.rate_index < b.rate_index;
    return a.snr_bin < b.snr_bin;
  }
  friend bool operator==(const BinKey& a, const BinKey& b) {
    return a.rate_index == b.rate_index && a.snr_bin == b.snr_bin;
  }
};

// Per-neighbor map from (rate, quantized SNR) to observed delivery statistics.
// One profile serves both directions of a link (reciprocity). SNR quantizes
// to 1 dB integer bins clamped to [-10, 60] dB, matching the once-per-second
// integer-granularity SNR reports the estimate is built from.
class SnrProfile {
 public:
  static constexpr int kMinBinDb = -10;
  static constexpr int kMaxBinDb = 60;
  static constexpr std::uint16_t kFormatVersion = 1;
  static constexpr std::size_t kHeaderSize = 16;
  static constexpr std::size_t kRecordSize = 19;

  explicit SnrProfile(std::string neighbor_id = {},
                      int packet_size_bytes = 1500)
      : neighbor_id_(std::move(neighbor_id)),
        packet_size_bytes_(packet_size_bytes) {}

  static int quantize(double snr_db) {
    int bin = static_cast<int>(std::llround(snr_db));
    if (bin < kMinBinDb) return kMinBinDb;
    if (bin > kMaxBinDb) return kMaxBinDb;
    return bin;
  }

  const std::string& neighbor_id() const { return neighbor_id_; }
  int packet_size_bytes() const { return packet_size_bytes_; }
  const std::map<BinKey, BinRecord>& bins() const { return bins_; }
  std::size_t bin_count() const { return bins_.size(); }
  bool empty() const { return bins_.empty(); }

  const BinRecord* find_bin(int rate_index, int snr_bin) const {
    auto it = bins_.find(BinKey{rate_index, snr_bin});
    return it == bins_.end() ? nullptr : &it->second;
  }

  // Initial probing phase: every attempt lands in its bin as a raw count and
  // the bin estimate is the plain acknowledged fraction.
  void bootstrap_record(int rate_index, double snr_db, bool success) {
    RateTable::standard().at(rate_index);
    auto& bin = bins_[BinKey{rate_index, quantize(snr_db)}];
    ++bin.tx;
    if (success) ++bin.ack;
    bin.pdr = static_cast<double>(bin.ack) / static_cast<double>(bin.tx);
  }

  // Online smoothing of an interval batch into the bin estimate:
  // pdr' = alpha_s * (batch ack ratio) + (1 - alpha_s) * pdr. Counts
  // accumulate raw. alpha_s = 0 keeps the profile static and is a no-op.
  void online_update(int rate_index, double snr_db, std::uint32_t batch_tx,
                     std::uint32_t batch_ack, double alpha_s) {
    RateTable::standard().at(rate_index);
    if (batch_tx == 0)
      throw std::invalid_argument("online_update: batch must have tx >= 1");
    if (batch_ack > batch_tx)
      throw std::invalid_argument("online_update: ack exceeds tx");
    if (alpha_s == 0.0) return;
    int bin_db = quantize(snr_db);
    double ratio =
        static_cast<double>(batch_ack) / static_cast<double>(batch_tx);
    auto it = bins_.find(BinKey{rate_index, bin_db});
    if (it == bins_.end()) {
      // No prior bin: seed from the neighborhood estimate when one exists so
      // the EWMA has a starting point, otherwise from the batch itself.
      double prior = lookup_pdr(rate_index, snr_db).value_or(ratio);
      auto& bin = bins_[BinKey{rate_index, bin_db}];
      bin.pdr = alpha_s * ratio + (1.0 - alpha_s) * prior;
      bin.tx = batch_tx;
      bin.ack = batch_ack;
    } else {
      it->second.pdr = alpha_s * ratio + (1.0 - alpha_s) * it->second.pdr;
      it->second.tx += batch_tx;
      it->second.ack += batch_ack;
    }
  }

  // Exact bin hit returns the stored estimate. Between populated bins the
  // value interpolates linearly; outside the populated range it clamps to the
  // nearest bin. A rate with no bins at all has no estimate.
  std::optional<double> lookup_pdr(int rate_index, double snr_db) const {
    RateTable::standard().at(rate_index);
    int bin_db = quantize(snr_db);
    auto lo = bins_.lower_bound(BinKey{rate_index, kMinBinDb});
    auto hi = bins_.upper_bound(BinKey{rate_index, kMaxBinDb});
    if (lo == hi) return std::nullopt;
    auto it = bins_.lower_bound(BinKey{rate_index, bin_db});
    if (it != hi && it->first.snr_bin == bin_db) return it->second.pdr;
    if (it == lo) return lo->second.pdr;          // below populated range
    if (it == hi) return std::prev(hi)->second.pdr;  // above populated range
    auto below = std::prev(it);
    double x0 = below->first.snr_bin, x1 = it->first.snr_bin;
    double y0 = below->second.pdr, y1 = it->second.pdr;
    return y0 + (y1 - y0) * (static_cast<double>(bin_db) - x0) / (x1 - x0);
  }

  // Binary layout, little-endian: 16-byte header (magic "SNRP", version u16,
  // rate count u8, reserved u8, packet size u32, bin count u32) followed by
  // 19-byte records (rate u8, snr bin i16, tx u32, ack u32, pdr f64) in
  // ascending (rate, bin) order.
  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + kRecordSize * bins_.size());
    out.push_back('S');
    out.push_back('N');
    out.push_back('R');
    out.push_back('P');
    put_u16(out, kFormatVersion);
    out.push_back(static_cast<std::uint8_t>(kNumRates));
    out.push_back(0);  // reserved
    put_u32(out, static_cast<std::uint32_t>(packet_size_bytes_));
    put_u32(out, static_cast<std::uint32_t>(bins_.size()));
    for (const auto& [key, bin] : bins_) {
      out.push_back(static_cast<std::uint8_t>(key.rate_index));
      put_i16(out, static_cast<std::int16_t>(key.snr_bin));
      put_u32(out, bin.tx);
      put_u32(out, bin.ack);
      put_f64(out, bin.pdr);
    }
    return out;
  }

  static SnrProfile deserialize(std::span<const std::uint8_t> data,
                                std::string neighbor_id = {}) {
    if (data.size() < kHeaderSize)
      throw ProfileParseError("truncated header", data.size());
    if (data[0] != 'S' || data[1] != 'N' || data[2] != 'R' || data[3] != 'P')
      throw ProfileParseError("bad magic", 0);
    std::uint16_t version = get_u16(data, 4);
    if (version != kFormatVersion)
      throw ProfileParseError("unsupported format version " +
                                  std::to_string(version),
                              4);
    if (data[6] != kNumRates)
      throw ProfileParseError("unexpected rate count", 6);
    std::uint32_t packet_size = get_u32(data, 8);
    std::uint32_t bin_count = get_u32(data, 12);
    std::size_t expected = kHeaderSize + kRecordSize * bin_count;
    if (data.size() < expected)
      throw ProfileParseError("truncated record stream", data.size());
    if (data.size() > expected)
      throw ProfileParseError("trailing bytes after records", expected);
    SnrProfile profile(std::move(neighbor_id), static_cast<int>(packet_size));
    std::size_t off = kHeaderSize;
    for (std::uint32_t i = 0; i < bin_count; ++i, off += kRecordSize) {
      int rate = data[off];
      if (rate < 1 || rate > kNumRates)
        throw ProfileParseError("rate index out of range", off);
      int bin_db = get_i16(data, off + 1);
      if (bin_db < kMinBinDb || bin_db > kMaxBinDb)
        throw ProfileParseError("snr bin out of range", off + 1);
      BinRecord bin;
      bin.tx = get_u32(data, off + 3);
      bin.ack = get_u32(data, off + 7);
      bin.pdr = get_f64(data, off + 11);
      if (bin.ack > bin.tx)
        throw ProfileParseError("ack exceeds tx", off + 7);
      if (!(bin.pdr >= 0.0 && bin.pdr <= 1.0))
        throw ProfileParseError("pdr outside [0,1]", off + 11);
      BinKey key{rate, bin_db};
      if (!profile.bins_.empty() && !(profile.bins_.rbegin()->first < key))
        throw ProfileParseError("records out of order", off);
      profile.bins_.emplace(key, bin);
    }
    return profile;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write profile: " + path);
    auto bytes = serialize();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
  }

  static SnrProfile load(const std::string& path,
                         std::string neighbor_id = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open profile: " + path);
    std::vector<std::uint8_t> bytes(
        (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes, std::move(neighbor_id));
  }

  void write_csv(std::ostream& out) const {
    out << "rate_mbps,snr_db,tx,ack,pdr\n";
    for (const auto& [key, bin] : bins_) {
      out << RateTable::standard().mbps(key.rate_index) << ',' << key.snr_bin
          << ',' << bin.tx << ',' << bin.ack << ',' << bin.pdr << '\n';
    }
  }

 private:
  static void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  static void put_i16(std::vector<std::uint8_t>& out, std::int16_t v) {
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  static void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
  static void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i)
      out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
  }
  static std::uint16_t get_u16(std::span<const std::uint8_t> d,
                               std::size_t off) {
    return static_cast<std::uint16_t>(d[off] |
                                      (static_cast<std::uint16_t>(d[off + 1])
                                       << 8));
  }
  static std::int16_t get_i16(std::span<const std::uint8_t> d,
                              std::size_t off) {
    return static_cast<std::int16_t>(get_u16(d, off));
  }
  static std::uint32_t get_u32(std::span<const std::uint8_t> d,
                               std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(d[off + static_cast<std::size_t>(i)])
           << (8 * i);
    return v;
  }
  static double get_f64(std::span<const std::uint8_t> d, std::size_t off) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(d[off + static_cast<std::size_t>(i)])
              << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string neighbor_id_;
  int packet_size_bytes_;
  std::map<BinKey, BinRecord> bins_;
};

}  // namespace lqelab
