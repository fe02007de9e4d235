#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "destripe/cube.hpp"
#include "destripe/errors.hpp"

namespace destripe {

/// Cube container: "CUBE", one version byte (1), dims as three 32-bit
/// little-endian unsigned ints, payload as 64-bit little-endian floats
/// in storage order (i fastest, then j, then k). Round trips are
/// bit-exact.
namespace cubefile {
constexpr char magic[4] = {'C', 'U', 'B', 'E'};
constexpr unsigned char version = 1;
} // namespace cubefile

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
    return v;
}

} // namespace detail

inline void write_cube(const std::string& path, const Cube& c) {
    const Dims d = c.dims();
    if (d.n1 > 0xffffffffull || d.n2 > 0xffffffffull || d.n3 > 0xffffffffull)
        throw io_error("cube too large for the file format: " + d.str());

    std::string buf;
    buf.reserve(17 + 8 * c.size());
    buf.append(cubefile::magic, 4);
    buf.push_back(static_cast<char>(cubefile::version));
    detail::put_u32_le(buf, static_cast<std::uint32_t>(d.n1));
    detail::put_u32_le(buf, static_cast<std::uint32_t>(d.n2));
    detail::put_u32_le(buf, static_cast<std::uint32_t>(d.n3));
    for (std::size_t n = 0; n < c.size(); ++n) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(c[n]);
        for (int b = 0; b < 8; ++b)
            buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    f.flush();
    if (!f) throw io_error("write failed: " + path);
}

inline Cube read_cube(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (f.bad()) throw io_error("read failed: " + path);

    if (raw.size() < 17) throw io_error("truncated header: " + path);
    if (std::memcmp(raw.data(), cubefile::magic, 4) != 0)
        throw io_error("bad magic, not a cube file: " + path);
    if (raw[4] != cubefile::version)
        throw io_error("unsupported cube format version " + std::to_string(raw[4]) + ": " + path);

    const std::uint32_t n1 = detail::get_u32_le(raw.data() + 5);
    const std::uint32_t n2 = detail::get_u32_le(raw.data() + 9);
    const std::uint32_t n3 = detail::get_u32_le(raw.data() + 13);
    if (n1 == 0 || n2 == 0 || n3 == 0) throw io_error("zero dimension in header: " + path);
    const std::uint64_t vol = std::uint64_t(n1) * n2 * n3;
    if (vol > (std::uint64_t(1) << 40))
        throw io_error("declared payload implausibly large: " + path);
    const std::uint64_t want = 17 + 8 * vol;
    if (raw.size() < want) throw io_error("truncated payload: " + path);
    if (raw.size() > want) throw io_error("trailing bytes after payload: " + path);

    Cube c(Dims{n1, n2, n3});
    for (std::uint64_t n = 0; n < vol; ++n)
        c[n] = std::bit_cast<double>(detail::get_u64_le(raw.data() + 17 + 8 * n));
    return c;
}

} // namespace destripe
