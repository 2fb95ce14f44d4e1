#include "ndf4d/ply.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "ndf4d/binary.hpp"
#include "ndf4d/errors.hpp"
#include "ndf4d/io.hpp"

namespace ndf4d {

double TriangleMesh::triangle_area(std::size_t i) const {
  const auto& t = triangles[i];
  const Vec3 a = vertices[t[0]];
  return 0.5 * (vertices[t[1]] - a).cross(vertices[t[2]] - a).norm();
}

double TriangleMesh::area() const {
  double total = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) total += triangle_area(i);
  return total;
}

namespace {

void write_ply(const std::vector<Point3>& vertices, const std::vector<std::array<std::uint32_t, 3>>* faces,
               const std::filesystem::path& path, PlyEncoding encoding) {
  const bool binary = encoding == PlyEncoding::kBinaryLittleEndian;
  std::ostringstream header;
  header << "ply\n"
         << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
         << "element vertex " << vertices.size() << "\n"
         << "property float x\nproperty float y\nproperty float z\n";
  if (faces) {
    header << "element face " << faces->size() << "\n"
           << "property list uchar int vertex_indices\n";
  }
  header << "end_header\n";

  write_file_atomic(path, [&](std::ostream& out) {
    out << header.str();
    if (binary) {
      ByteWriter w;
      for (const auto& v : vertices) {
        w.put<float>(static_cast<float>(v.x()));
        w.put<float>(static_cast<float>(v.y()));
        w.put<float>(static_cast<float>(v.z()));
      }
      if (faces) {
        for (const auto& f : *faces) {
          w.put<std::uint8_t>(3);
          for (auto idx : f) w.put<std::int32_t>(static_cast<std::int32_t>(idx));
        }
      }
      out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    } else {
      char line[128];
      for (const auto& v : vertices) {
        // %.9g round-trips float32 exactly.
        std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", static_cast<double>(static_cast<float>(v.x())),
                      static_cast<double>(static_cast<float>(v.y())), static_cast<double>(static_cast<float>(v.z())));
        out << line;
      }
      if (faces) {
        for (const auto& f : *faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
      }
    }
  });
}

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

ScalarType parse_type(const std::string& name) {
  if (name == "char" || name == "int8") return ScalarType::kInt8;
  if (name == "uchar" || name == "uint8") return ScalarType::kUInt8;
  if (name == "short" || name == "int16") return ScalarType::kInt16;
  if (name == "ushort" || name == "uint16") return ScalarType::kUInt16;
  if (name == "int" || name == "int32") return ScalarType::kInt32;
  if (name == "uint" || name == "uint32") return ScalarType::kUInt32;
  if (name == "float" || name == "float32") return ScalarType::kFloat32;
  if (name == "double" || name == "float64") return ScalarType::kFloat64;
  throw FormatError("unsupported PLY property type '" + name + "'");
}

double read_binary(ByteReader& in, ScalarType type) {
  switch (type) {
    case ScalarType::kInt8: return in.get<std::int8_t>();
    case ScalarType::kUInt8: return in.get<std::uint8_t>();
    case ScalarType::kInt16: return in.get<std::int16_t>();
    case ScalarType::kUInt16: return in.get<std::uint16_t>();
    case ScalarType::kInt32: return in.get<std::int32_t>();
    case ScalarType::kUInt32: return in.get<std::uint32_t>();
    case ScalarType::kFloat32: return in.get<float>();
    case ScalarType::kFloat64: return in.get<double>();
  }
  return 0.0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::kFloat32;
  bool is_list = false;
  ScalarType count_type = ScalarType::kUInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

}  // namespace

void export_ply(const TriangleMesh& mesh, const std::filesystem::path& path, PlyEncoding encoding) {
  write_ply(mesh.vertices, &mesh.triangles, path, encoding);
}

void export_point_cloud_ply(const std::vector<Point3>& points, const std::filesystem::path& path,
                            PlyEncoding encoding) {
  write_ply(points, nullptr, path, encoding);
}

TriangleMesh read_ply(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto header_end = bytes.find("end_header");
  if (bytes.rfind("ply", 0) != 0 || header_end == std::string::npos) {
    throw FormatError("not a PLY file: " + path.string());
  }
  const auto body_start = bytes.find('\n', header_end);
  if (body_start == std::string::npos) throw FormatError("truncated PLY header: " + path.string());

  std::istringstream header(bytes.substr(0, header_end));
  std::string line;
  bool binary = false;
  std::vector<Element> elements;
  while (std::getline(header, line)) {
    std::istringstream tok(line);
    std::string word;
    tok >> word;
    if (word == "format") {
      std::string fmt;
      tok >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt != "ascii") {
        throw FormatError("unsupported PLY format '" + fmt + "'");
      }
    } else if (word == "element") {
      Element e;
      tok >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw FormatError("PLY property before element");
      Property p;
      std::string type;
      tok >> type;
      if (type == "list") {
        std::string count_type;
        std::string item_type;
        tok >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = parse_type(count_type);
        p.type = parse_type(item_type);
      } else {
        p.type = parse_type(type);
        tok >> p.name;
      }
      elements.back().properties.push_back(p);
    }
  }

  TriangleMesh mesh;
  const std::string_view body = std::string_view(bytes).substr(body_start + 1);
  ByteReader bin(body);
  std::istringstream text{std::string(binary ? std::string_view{} : body)};
  auto next_value = [&](ScalarType type) -> double {
    if (binary) return read_binary(bin, type);
    double v;
    if (!(text >> v)) throw FormatError("truncated PLY body: " + path.string());
    // Same value the binary encoding would carry.
    return type == ScalarType::kFloat32 ? static_cast<double>(static_cast<float>(v)) : v;
  };

  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    for (std::size_t i = 0; i < e.count; ++i) {
      Point3 p = Point3::Zero();
      for (const auto& prop : e.properties) {
        if (prop.is_list) {
          const auto n = static_cast<std::size_t>(next_value(prop.count_type));
          std::vector<std::uint32_t> idx(n);
          for (auto& x : idx) x = static_cast<std::uint32_t>(next_value(prop.type));
          if (is_face && prop.name == "vertex_indices") {
            if (n < 3) throw FormatError("PLY face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < n; ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
          }
          continue;
        }
        const double v = next_value(prop.type);
        if (is_vertex) {
          if (prop.name == "x") p.x() = v;
          if (prop.name == "y") p.y() = v;
          if (prop.name == "z") p.z() = v;
        }
      }
      if (is_vertex) mesh.vertices.push_back(p);
    }
  }
  for (const auto& t : mesh.triangles) {
    for (auto idx : t) {
      if (idx >= mesh.vertices.size()) throw FormatError("PLY face index out of range");
    }
  }
  return mesh;
}

}  // namespace ndf4d
