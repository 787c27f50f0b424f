#include "eeae/checkpoint.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace eeae {

namespace {

constexpr char kMagic[8] = {'E', 'E', 'A', 'E', 'C', 'K', 'P', 'T'};

class Writer {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(bits >> (8 * i)));
    }
    void raw(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        bytes_.insert(bytes_.end(), c, c + n);
    }
    std::vector<unsigned char>& bytes() { return bytes_; }

private:
    std::vector<unsigned char> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return need(1)[0]; }
    std::uint32_t u32() {
        auto p = need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
        return v;
    }
    double f64() {
        auto p = need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
        return std::bit_cast<double>(v);
    }
    std::span<const unsigned char> need(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw CheckpointTruncatedError("checkpoint: unexpected end of data");
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc(std::span<const unsigned char> bytes) {
    uLong c = crc32(0L, Z_NULL, 0);
    return static_cast<std::uint32_t>(crc32(c, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<unsigned char> serialize(const Checkpoint& checkpoint) {
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(Checkpoint::kVersion);
    const auto layers = checkpoint.model.layers();
    w.u32(static_cast<std::uint32_t>(checkpoint.model.encoder_depth()));
    w.u32(static_cast<std::uint32_t>(layers.size()));
    for (const auto& l : layers) {
        w.u32(static_cast<std::uint32_t>(l.in_dim()));
        w.u32(static_cast<std::uint32_t>(l.out_dim()));
        w.u8(static_cast<std::uint8_t>(l.activation));
    }
    w.u32(static_cast<std::uint32_t>(checkpoint.snapshots.size()));
    for (double s : checkpoint.snapshots) w.f64(s);
    w.u32(static_cast<std::uint32_t>(checkpoint.config.size()));
    w.raw(checkpoint.config.data(), checkpoint.config.size());
    for (const auto& l : layers) {
        for (double v : l.weight.flat()) w.f64(v);
        for (double v : l.bias) w.f64(v);
    }
    w.u32(crc(w.bytes()));
    return std::move(w.bytes());
}

Checkpoint deserialize(std::span<const unsigned char> bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw CheckpointHeaderError("checkpoint: bad magic");
    }
    Reader r(bytes.subspan(sizeof kMagic));
    const std::uint32_t version = r.u32();
    if (version != Checkpoint::kVersion) {
        throw CheckpointVersionError("checkpoint: version " + std::to_string(version) + ", this build reads " +
                                     std::to_string(Checkpoint::kVersion));
    }
    if (bytes.size() < sizeof kMagic + 8) throw CheckpointTruncatedError("checkpoint: unexpected end of data");
    const auto body = bytes.first(bytes.size() - 4);
    Reader tail(bytes.last(4));
    const bool checksum_ok = tail.u32() == crc(body);

    const std::uint32_t encoder_depth = r.u32();
    const std::uint32_t count = r.u32();
    if (encoder_depth == 0 || encoder_depth >= count) {
        throw CheckpointHeaderError("checkpoint: encoder depth " + std::to_string(encoder_depth) + " of " +
                                    std::to_string(count) + " layers");
    }
    struct Shape {
        std::uint32_t in, out;
        std::uint8_t act;
    };
    std::vector<Shape> shapes;
    std::size_t params = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        Shape s{r.u32(), r.u32(), r.u8()};
        if (s.act > 2) throw CheckpointHeaderError("checkpoint: invalid activation tag " + std::to_string(s.act));
        params += std::size_t{s.in} * s.out + s.out;
        shapes.push_back(s);
    }
    Checkpoint out;
    const std::uint32_t snaps = r.u32();
    if (r.remaining() < std::size_t{snaps} * 8) throw CheckpointTruncatedError("checkpoint: unexpected end of data");
    out.snapshots.resize(snaps);
    for (double& s : out.snapshots) s = r.f64();
    const std::uint32_t config_len = r.u32();
    auto cfg = r.need(config_len);
    out.config.assign(cfg.begin(), cfg.end());
    if (r.remaining() != params * 8 + 4) {
        throw CheckpointTruncatedError("checkpoint: parameter block holds " + std::to_string(r.remaining()) +
                                       " bytes, architecture needs " + std::to_string(params * 8 + 4));
    }
    if (!checksum_ok) throw CheckpointChecksumError("checkpoint: checksum mismatch");

    std::vector<DenseLayer> encoder, decoder;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto& s = shapes[i];
        Matrix weight(s.out, s.in);
        for (double& v : weight.flat()) v = r.f64();
        std::vector<double> bias(s.out);
        for (double& v : bias) v = r.f64();
        DenseLayer layer(std::move(weight), std::move(bias), static_cast<Activation>(s.act));
        (i < encoder_depth ? encoder : decoder).push_back(std::move(layer));
    }
    out.model = AEModel(std::move(encoder), std::move(decoder));
    return out;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    const auto bytes = serialize(checkpoint);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CheckpointError("short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open " + path.string());
    std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    return deserialize(bytes);
}

}  // namespace eeae
