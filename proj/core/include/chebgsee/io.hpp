#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chebgsee/mps.hpp"

namespace chebgsee {

/// Binary container for MPS/MPO values.
///
/// Layout (all integers and doubles little-endian):
///
///   magic "CGTN" | u32 version | u32 kind (1 = MPS, 2 = MPO)
///   u64 header length | JSON header (shape metadata and free-form tags)
///   u64 n_sites | u64 bond_dims[n_sites + 1]
///   MPS only: f64 log_norm | i64 ortho_center (-1 when absent)
///   site tensors, row-major over (left, phys, right) for MPS and
///   (left, out, in, right) for MPO, each entry as f64 real, f64 imag.
///
/// The JSON header must agree with the binary shape; loaders validate it.
inline constexpr std::uint32_t kContainerVersion = 1;

using ContainerTags = std::map<std::string, std::string>;

std::vector<std::byte> encode_mps(const Mps& psi, const ContainerTags& tags = {});
std::vector<std::byte> encode_mpo(const Mpo& op, const ContainerTags& tags = {});

/// Throws FormatError carrying the byte offset of the first inconsistency.
Mps decode_mps(std::span<const std::byte> bytes, ContainerTags* tags = nullptr);
Mpo decode_mpo(std::span<const std::byte> bytes, ContainerTags* tags = nullptr);

void save_mps(const std::filesystem::path& path, const Mps& psi, const ContainerTags& tags = {});
void save_mpo(const std::filesystem::path& path, const Mpo& op, const ContainerTags& tags = {});
Mps load_mps(const std::filesystem::path& path, ContainerTags* tags = nullptr);
Mpo load_mpo(const std::filesystem::path& path, ContainerTags* tags = nullptr);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace chebgsee
