#pragma once

#include <filesystem>
#include <iosfwd>

#include "tucktree/sst.hpp"
#include "tucktree/tensor.hpp"

namespace tucktree {

// Binary tensor container "TTS1":
//   magic "TTS1" | u16 version=1 | u8 p | p x u64 dims (temporal first)
//   | row-major f64 payload
// All integers and floats little-endian. Round-trips are bit-exact.
void write_tensor(std::ostream& out, const DenseTensor& x);
DenseTensor read_tensor(std::istream& in);
void write_tensor_file(const std::filesystem::path& path, const DenseTensor& x);
DenseTensor read_tensor_file(const std::filesystem::path& path);

// Tree container "SST1":
//   magic "SST1" | u16 version=1 | u64 timespan
//   | u8 p | (p-1) x u64 non-temporal dims | p x u64 requested ranks
//   | f64 theta | u32 als.max_iters | f64 als.tol | u64 als.seed
//   | u64 stitch_count | u64 root id | u64 node count
//   | node table: u64 id | u64 begin | u64 end | u8 kind | u64 left
//     | u64 right | u8 has_decomposition
//     [| u8 p | p x u64 core dims | f64 core payload
//      | per mode: u64 rows | u64 cols | row-major f64 entries]
// Numeric payload round-trips are bit-exact. Malformed input raises
// std::runtime_error; structural invariants are the caller's job via
// StreamSegmentTree::validate().
void write_tree(std::ostream& out, const StreamSegmentTree& tree);
StreamSegmentTree read_tree(std::istream& in);
void write_tree_file(const std::filesystem::path& path, const StreamSegmentTree& tree);
StreamSegmentTree read_tree_file(const std::filesystem::path& path);

/// CSV slice import: the first line holds the slice dims (comma-separated),
/// the rest the row-major values separated by commas and/or whitespace.
/// Decimal parsing may not round-trip binary doubles exactly; prefer TTS1
/// when bit-exactness matters.
DenseTensor read_csv_slice(const std::filesystem::path& path);

}  // namespace tucktree
