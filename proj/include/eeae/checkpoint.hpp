#pragma once

#include "eeae/autoencoder.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace eeae {

/// On-disk layout (all integers little-endian):
///   magic "EEAECKPT" (8 bytes) | version u32
///   encoder depth u32 | layer count u32 | per layer: in u32, out u32, activation u8
///   snapshot count u32 | snapshots f64…
///   config length u32 | config bytes (UTF-8 JSON)
///   parameters f64… (per layer: weight row-major, then bias)
///   CRC-32 u32 of every preceding byte
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    AEModel model;
    std::vector<double> snapshots;
    std::string config;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class CheckpointHeaderError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};
class CheckpointVersionError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};
class CheckpointTruncatedError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};
class CheckpointChecksumError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

std::vector<unsigned char> serialize(const Checkpoint& checkpoint);
Checkpoint deserialize(std::span<const unsigned char> bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace eeae
