#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "handco/mesh.h"

namespace handco {
namespace {

static_assert(std::endian::native == std::endian::little,
              "STL I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

constexpr std::size_t kHeaderBytes = 80;
constexpr std::size_t kFacetBytes = 50;

void put_f32(std::string& out, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

float get_f32(const char* p) {
  float v;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace

std::string stl_bytes(const TriMesh& m, std::string_view header) {
  std::string out;
  out.reserve(kHeaderBytes + 4 + kFacetBytes * m.triangles.size());
  std::string head(kHeaderBytes, '\0');
  std::memcpy(head.data(), header.data(), std::min(header.size(), kHeaderBytes));
  out += head;
  const auto count = static_cast<std::uint32_t>(m.triangles.size());
  char cbuf[4];
  std::memcpy(cbuf, &count, 4);
  out.append(cbuf, 4);
  for (const auto& t : m.triangles) {
    // Vertices go out first and the normal is computed from the stored
    // floats. Rounding through a local float is not enough: GCC 11 at -O3
    // vectorizes the double -> float -> double round trip away.
    const std::size_t facet = out.size();
    out.append(12, '\0');
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < 3; ++c) put_f32(out, static_cast<float>(m.vertices[t[k]][c]));
    }
    out.append(2, '\0');
    Vec3 v[3];
    for (int k = 0; k < 3; ++k) {
      const char* p = out.data() + facet + 12 + 12 * k;
      v[k] = Vec3(get_f32(p), get_f32(p + 4), get_f32(p + 8));
    }
    Vec3 n = (v[1] - v[0]).cross(v[2] - v[0]);
    const double len = n.norm();
    n = len > 0 ? Vec3(n / len) : Vec3::Zero();
    for (int c = 0; c < 3; ++c) {
      const float f = static_cast<float>(n[c]);
      std::memcpy(out.data() + facet + 4 * c, &f, 4);
    }
  }
  return out;
}

void write_stl(const TriMesh& m, const std::filesystem::path& path) {
  const std::string bytes = stl_bytes(m);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_stl: cannot open " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write_stl: write failed for " + path.string());
}

TriMesh parse_stl(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes + 4) throw std::runtime_error("read_stl: truncated header");
  std::uint32_t count;
  std::memcpy(&count, bytes.data() + kHeaderBytes, 4);
  const std::size_t expected = kHeaderBytes + 4 + kFacetBytes * static_cast<std::size_t>(count);
  if (bytes.size() != expected) {
    throw std::runtime_error("read_stl: size mismatch (expected " + std::to_string(expected) +
                             " bytes, got " + std::to_string(bytes.size()) + ")");
  }
  TriMesh m;
  std::map<std::array<std::uint32_t, 3>, int> index;
  const char* p = bytes.data() + kHeaderBytes + 4;
  for (std::uint32_t i = 0; i < count; ++i, p += kFacetBytes) {
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      const char* vp = p + 12 + 12 * k;
      std::array<std::uint32_t, 3> key;
      std::memcpy(key.data(), vp, 12);
      auto [it, inserted] = index.emplace(key, static_cast<int>(m.vertices.size()));
      if (inserted) {
        m.vertices.emplace_back(get_f32(vp), get_f32(vp + 4), get_f32(vp + 8));
      }
      tri[k] = it->second;
    }
    m.triangles.push_back(tri);
  }
  return m;
}

TriMesh read_stl(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_stl: cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_stl(ss.str());
}

}  // namespace handco
