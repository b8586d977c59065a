#include "chebgsee/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "chebgsee/errors.hpp"

namespace chebgsee {

namespace {

constexpr char kMagic[4] = {'C', 'G', 'T', 'N'};
constexpr std::uint32_t kKindMps = 1;
constexpr std::uint32_t kKindMpo = 2;

class Writer {
 public:
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::byte*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void cplx(Complex c) {
    f64(c.real());
    f64(c.imag());
  }
  std::vector<std::byte> take() { return std::move(bytes_); }

 private:
  std::vector<std::byte> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw FormatError(std::string("truncated container while reading ") + what, pos_);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int64_t i64(const char* what) { return static_cast<std::int64_t>(u64(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  Complex cplx(const char* what) {
    const double re = f64(what);
    const double im = f64(what);
    return {re, im};
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json header_json(const char* kind, const std::vector<std::size_t>& dims, const ContainerTags& tags) {
  nlohmann::json h;
  h["kind"] = kind;
  h["version"] = kContainerVersion;
  h["n_sites"] = dims.size() - 1;
  h["phys_dim"] = kPhysDim;
  h["bond_dims"] = dims;
  h["tags"] = tags;
  return h;
}

void write_preamble(Writer& w, std::uint32_t kind, const nlohmann::json& header,
                    const std::vector<std::size_t>& dims) {
  w.raw(kMagic, 4);
  w.u32(kContainerVersion);
  w.u32(kind);
  const std::string text = header.dump();
  w.u64(text.size());
  w.raw(text.data(), text.size());
  w.u64(dims.size() - 1);
  for (auto d : dims) w.u64(d);
}

struct Preamble {
  std::vector<std::size_t> dims;
  ContainerTags tags;
};

Preamble read_preamble(Reader& r, std::uint32_t expected_kind, const char* kind_name) {
  const std::string magic = r.str(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad magic", 0);
  const auto version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kContainerVersion) throw FormatError("unsupported version " + std::to_string(version), version_at);
  const auto kind_at = r.offset();
  const auto kind = r.u32("kind");
  if (kind != expected_kind) throw FormatError(std::string("container is not an ") + kind_name, kind_at);

  const auto header_len = r.u64("header length");
  const auto header_at = r.offset();
  if (header_len > r.remaining()) throw FormatError("header length exceeds container", header_at);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.str(header_len, "header"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed JSON header: ") + e.what(), header_at);
  }

  const auto n_at = r.offset();
  const auto n_sites = r.u64("site count");
  if (n_sites == 0) throw FormatError("container has no sites", n_at);
  if (n_sites > r.remaining() / 8) throw FormatError("site count exceeds container", n_at);
  Preamble p;
  const auto dims_at = r.offset();
  for (std::uint64_t i = 0; i <= n_sites; ++i) {
    const auto at = r.offset();
    const auto d = r.u64("bond dimension");
    if (d == 0 || d > (std::uint64_t{1} << 32)) throw FormatError("invalid bond dimension", at);
    p.dims.push_back(static_cast<std::size_t>(d));
  }
  if (p.dims.front() != 1 || p.dims.back() != 1) throw FormatError("boundary bonds must be 1", dims_at);

  try {
    if (header.at("kind").get<std::string>() != kind_name) throw FormatError("header kind mismatch", header_at);
    if (header.at("n_sites").get<std::uint64_t>() != n_sites) {
      throw FormatError("header site count does not match payload", n_at);
    }
    if (header.at("bond_dims").get<std::vector<std::size_t>>() != p.dims) {
      throw FormatError("header bond dimensions do not match payload", dims_at);
    }
    if (header.contains("tags")) p.tags = header["tags"].get<ContainerTags>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON header: ") + e.what(), header_at);
  }
  return p;
}

}  // namespace

std::vector<std::byte> encode_mps(const Mps& psi, const ContainerTags& tags) {
  const auto dims = psi.bond_dims();
  Writer w;
  write_preamble(w, kKindMps, header_json("mps", dims, tags), dims);
  w.f64(psi.log_norm());
  w.i64(psi.ortho_center() ? static_cast<std::int64_t>(*psi.ortho_center()) : -1);
  for (const auto& t : psi.sites()) {
    for (Eigen::Index l = 0; l < t[0].rows(); ++l)
      for (std::size_t s = 0; s < kPhysDim; ++s)
        for (Eigen::Index r = 0; r < t[0].cols(); ++r) w.cplx(t[s](l, r));
  }
  return w.take();
}

std::vector<std::byte> encode_mpo(const Mpo& op, const ContainerTags& tags) {
  const auto dims = op.bond_dims();
  Writer w;
  write_preamble(w, kKindMpo, header_json("mpo", dims, tags), dims);
  for (const auto& t : op.sites()) {
    for (Eigen::Index l = 0; l < t[0].rows(); ++l)
      for (std::size_t o = 0; o < kPhysDim; ++o)
        for (std::size_t i = 0; i < kPhysDim; ++i)
          for (Eigen::Index r = 0; r < t[0].cols(); ++r) w.cplx(t[op_index(o, i)](l, r));
  }
  return w.take();
}

Mps decode_mps(std::span<const std::byte> bytes, ContainerTags* tags) {
  Reader r(bytes);
  auto pre = read_preamble(r, kKindMps, "mps");
  const auto log_at = r.offset();
  const double log_norm = r.f64("log_norm");
  if (!std::isfinite(log_norm)) throw FormatError("log_norm is not finite", log_at);
  const auto center_at = r.offset();
  const auto center = r.i64("ortho center");
  const std::size_t n = pre.dims.size() - 1;
  if (center < -1 || center >= static_cast<std::int64_t>(n)) throw FormatError("ortho center out of range", center_at);

  std::size_t expected = 0;
  for (std::size_t i = 0; i < n; ++i) expected += pre.dims[i] * kPhysDim * pre.dims[i + 1] * 16;
  if (r.remaining() < expected) throw FormatError("truncated tensor payload", r.offset());
  if (r.remaining() > expected) throw FormatError("trailing bytes after tensor payload", r.offset() + expected);

  std::vector<SiteTensor> sites(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dl = static_cast<Eigen::Index>(pre.dims[i]);
    const auto dr = static_cast<Eigen::Index>(pre.dims[i + 1]);
    for (auto& m : sites[i]) m.resize(dl, dr);
    for (Eigen::Index l = 0; l < dl; ++l)
      for (std::size_t s = 0; s < kPhysDim; ++s)
        for (Eigen::Index c = 0; c < dr; ++c) sites[i][s](l, c) = r.cplx("tensor entry");
  }
  if (tags) *tags = std::move(pre.tags);
  std::optional<std::size_t> oc;
  if (center >= 0) oc = static_cast<std::size_t>(center);
  return Mps(std::move(sites), log_norm, oc);
}

Mpo decode_mpo(std::span<const std::byte> bytes, ContainerTags* tags) {
  Reader r(bytes);
  auto pre = read_preamble(r, kKindMpo, "mpo");
  const std::size_t n = pre.dims.size() - 1;
  std::size_t expected = 0;
  for (std::size_t i = 0; i < n; ++i) expected += pre.dims[i] * 4 * pre.dims[i + 1] * 16;
  if (r.remaining() < expected) throw FormatError("truncated tensor payload", r.offset());
  if (r.remaining() > expected) throw FormatError("trailing bytes after tensor payload", r.offset() + expected);

  std::vector<OpTensor> sites(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dl = static_cast<Eigen::Index>(pre.dims[i]);
    const auto dr = static_cast<Eigen::Index>(pre.dims[i + 1]);
    for (auto& m : sites[i]) m.resize(dl, dr);
    for (Eigen::Index l = 0; l < dl; ++l)
      for (std::size_t o = 0; o < kPhysDim; ++o)
        for (std::size_t in = 0; in < kPhysDim; ++in)
          for (Eigen::Index c = 0; c < dr; ++c) sites[i][op_index(o, in)](l, c) = r.cplx("tensor entry");
  }
  if (tags) *tags = std::move(pre.tags);
  return Mpo(std::move(sites));
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(buf.size());
  std::memcpy(out.data(), buf.data(), buf.size());
  return out;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParameterError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void save_mps(const std::filesystem::path& path, const Mps& psi, const ContainerTags& tags) {
  write_file_bytes(path, encode_mps(psi, tags));
}

void save_mpo(const std::filesystem::path& path, const Mpo& op, const ContainerTags& tags) {
  write_file_bytes(path, encode_mpo(op, tags));
}

Mps load_mps(const std::filesystem::path& path, ContainerTags* tags) { return decode_mps(read_file_bytes(path), tags); }

Mpo load_mpo(const std::filesystem::path& path, ContainerTags* tags) { return decode_mpo(read_file_bytes(path), tags); }

}  // namespace chebgsee
