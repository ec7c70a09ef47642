#pragma once

// Optional on-disk store for expensive square matrices (restricted Hecke
// operators). Files are content-addressed: the parameter string is hashed
// with FNV-1a and the digest names the file, so distinct parameters never
// collide in practice and a stale directory can simply be deleted. The
// format is fixed little-endian:
//
//   "EISR1" | u32 version | u64 level | u64 modulus | u64 dim | dim*dim u32
//
// Writes go to a temporary file in the same directory followed by an atomic
// rename, so readers never observe a partial file. Loading is defensive:
// any size, magic, version, parameter, or entry-range mismatch makes the
// load fail and the caller recompute (and overwrite).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "eisrank/fp_linalg.hpp"
#include "eisrank/nt.hpp"

namespace eisrank {

inline u64 fnv1a64(const void* data, std::size_t len) {
    const unsigned char* bytes = static_cast<const unsigned char*>(data);
    u64 h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline u64 fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex16(u64 x) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[std::size_t(i)] = digits[x & 0xf];
        x >>= 4;
    }
    return s;
}

inline std::filesystem::path cache_path_for(const std::string& dir, const std::string& key) {
    return std::filesystem::path(dir) / (hex16(fnv1a64(key)) + ".eisr");
}

namespace detail {

inline void put_u32(std::string& out, u32 x) {
    for (int i = 0; i < 4; ++i) out.push_back(char((x >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, u64 x) {
    for (int i = 0; i < 8; ++i) out.push_back(char((x >> (8 * i)) & 0xff));
}

inline u32 get_u32(const std::string& buf, std::size_t off) {
    u32 x = 0;
    for (int i = 0; i < 4; ++i) x |= u32(static_cast<unsigned char>(buf[off + std::size_t(i)])) << (8 * i);
    return x;
}

inline u64 get_u64(const std::string& buf, std::size_t off) {
    u64 x = 0;
    for (int i = 0; i < 8; ++i) x |= u64(static_cast<unsigned char>(buf[off + std::size_t(i)])) << (8 * i);
    return x;
}

}  // namespace detail

inline constexpr u32 kCacheVersion = 1;
inline constexpr std::size_t kCacheHeaderBytes = 5 + 4 + 8 + 8 + 8;

/**
 * Try to load a square matrix stored under `key`; returns false (leaving
 * `out` untouched) when the file is missing, malformed, or was written for
 * different parameters.
 */
inline bool cache_load_matrix(const std::string& dir, const std::string& key,
                              u64 level, u64 modulus, FpMatrix& out) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::path path = cache_path_for(dir, key);
    if (!fs::is_regular_file(path, ec) || ec) return false;
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < kCacheHeaderBytes) return false;
    if (buf.compare(0, 5, "EISR1") != 0) return false;
    if (detail::get_u32(buf, 5) != kCacheVersion) return false;
    if (detail::get_u64(buf, 9) != level) return false;
    if (detail::get_u64(buf, 17) != modulus) return false;
    u64 dim = detail::get_u64(buf, 25);
    if (dim > 65535) return false;  // nothing we store is ever this large
    if (buf.size() != kCacheHeaderBytes + 4 * dim * dim) return false;
    FpMatrix m(static_cast<std::size_t>(dim), static_cast<std::size_t>(dim), modulus);
    for (std::size_t i = 0; i < dim * dim; ++i) {
        u32 v = detail::get_u32(buf, kCacheHeaderBytes + 4 * i);
        if (v >= modulus) return false;
        m.a[i] = std::uint16_t(v);
    }
    out = std::move(m);
    return true;
}

/**
 * Store a square matrix under `key`. Best effort: the cache is an
 * accelerator, so filesystem trouble is swallowed and the computation's
 * result is simply not cached.
 */
inline void cache_store_matrix(const std::string& dir, const std::string& key,
                               u64 level, u64 modulus, const FpMatrix& m) {
    namespace fs = std::filesystem;
    if (m.rows != m.cols) throw std::invalid_argument("cache_store_matrix: matrix must be square");
    std::string buf;
    buf.reserve(kCacheHeaderBytes + 4 * m.rows * m.cols);
    buf.append("EISR1");
    detail::put_u32(buf, kCacheVersion);
    detail::put_u64(buf, level);
    detail::put_u64(buf, modulus);
    detail::put_u64(buf, m.rows);
    for (std::uint16_t v : m.a) detail::put_u32(buf, v);

    fs::path path = cache_path_for(dir, key);
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(stamp);
    try {
        {
            std::error_code mkec;
            fs::create_directories(fs::path(dir), mkec);  // a failed cache write must not break the computation
            std::ofstream outf(tmp, std::ios::binary | std::ios::trunc);
            if (!outf) return;
            outf.write(buf.data(), std::streamsize(buf.size()));
            if (!outf) {
                outf.close();
                std::error_code ec;
                fs::remove(tmp, ec);
                return;
            }
        }
        fs::rename(tmp, path);
    } catch (const fs::filesystem_error&) {
        std::error_code ec;
        fs::remove(tmp, ec);
    }
}

}  // namespace eisrank
