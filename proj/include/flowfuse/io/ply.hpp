#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flowfuse/error.hpp"

namespace flowfuse::ply {

enum class Format { Ascii, BinaryLittleEndian };

enum class Type { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline std::size_t type_size(Type t) {
  switch (t) {
    case Type::Int8:
    case Type::UInt8: return 1;
    case Type::Int16:
    case Type::UInt16: return 2;
    case Type::Int32:
    case Type::UInt32:
    case Type::Float32: return 4;
    case Type::Float64: return 8;
  }
  return 0;
}

inline const char* type_name(Type t) {
  switch (t) {
    case Type::Int8: return "char";
    case Type::UInt8: return "uchar";
    case Type::Int16: return "short";
    case Type::UInt16: return "ushort";
    case Type::Int32: return "int";
    case Type::UInt32: return "uint";
    case Type::Float32: return "float";
    case Type::Float64: return "double";
  }
  return "";
}

inline Type parse_type(const std::string& s) {
  if (s == "char" || s == "int8") return Type::Int8;
  if (s == "uchar" || s == "uint8") return Type::UInt8;
  if (s == "short" || s == "int16") return Type::Int16;
  if (s == "ushort" || s == "uint16") return Type::UInt16;
  if (s == "int" || s == "int32") return Type::Int32;
  if (s == "uint" || s == "uint32") return Type::UInt32;
  if (s == "float" || s == "float32") return Type::Float32;
  if (s == "double" || s == "float64") return Type::Float64;
  fail(ErrorKind::Data, "ply: unknown property type '" + s + "'");
}

inline bool is_integral(Type t) { return t != Type::Float32 && t != Type::Float64; }

struct Property {
  std::string name;
  Type type = Type::Float32;
  bool is_list = false;
  Type count_type = Type::UInt8;
  std::vector<double> values;                   // scalar properties
  std::vector<std::vector<std::int64_t>> lists;  // list properties
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;

  const Property* find(const std::string& prop) const {
    for (const auto& p : properties)
      if (p.name == prop) return &p;
    return nullptr;
  }
  Property& add_scalar(const std::string& prop, Type t, std::vector<double> v) {
    Property p;
    p.name = prop;
    p.type = t;
    p.values = std::move(v);
    properties.push_back(std::move(p));
    return properties.back();
  }
  Property& add_list(const std::string& prop, Type count_t, Type item_t, std::vector<std::vector<std::int64_t>> l) {
    Property p;
    p.name = prop;
    p.type = item_t;
    p.is_list = true;
    p.count_type = count_t;
    p.lists = std::move(l);
    properties.push_back(std::move(p));
    return properties.back();
  }
};

struct File {
  Format format = Format::BinaryLittleEndian;
  std::vector<std::string> comments;
  std::vector<Element> elements;

  const Element* find(const std::string& name) const {
    for (const auto& e : elements)
      if (e.name == name) return &e;
    return nullptr;
  }
};

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

template <class T>
double read_as(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorKind::Data, "ply: unexpected end of binary data");
  return static_cast<double>(v);
}

inline double read_binary(std::istream& is, Type t) {
  switch (t) {
    case Type::Int8: return read_as<std::int8_t>(is);
    case Type::UInt8: return read_as<std::uint8_t>(is);
    case Type::Int16: return read_as<std::int16_t>(is);
    case Type::UInt16: return read_as<std::uint16_t>(is);
    case Type::Int32: return read_as<std::int32_t>(is);
    case Type::UInt32: return read_as<std::uint32_t>(is);
    case Type::Float32: return read_as<float>(is);
    case Type::Float64: return read_as<double>(is);
  }
  return 0.0;
}

template <class T>
void write_as(std::ostream& os, double v) {
  const T x = static_cast<T>(v);
  os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

inline void write_binary(std::ostream& os, Type t, double v) {
  switch (t) {
    case Type::Int8: return write_as<std::int8_t>(os, v);
    case Type::UInt8: return write_as<std::uint8_t>(os, v);
    case Type::Int16: return write_as<std::int16_t>(os, v);
    case Type::UInt16: return write_as<std::uint16_t>(os, v);
    case Type::Int32: return write_as<std::int32_t>(os, v);
    case Type::UInt32: return write_as<std::uint32_t>(os, v);
    case Type::Float32: return write_as<float>(os, v);
    case Type::Float64: return write_as<double>(os, v);
  }
}

inline void write_ascii(std::ostream& os, Type t, double v) {
  if (is_integral(t)) {
    os << static_cast<long long>(v);
  } else if (t == Type::Float32) {
    os << std::setprecision(std::numeric_limits<float>::max_digits10) << static_cast<float>(v);
  } else {
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  }
}

inline double read_ascii(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) fail(ErrorKind::Data, "ply: unexpected end of ascii data");
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::Data, "ply: bad number '" + tok + "'");
  }
}

}  // namespace detail

inline File read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0) fail(ErrorKind::Data, "ply: missing 'ply' magic");
  File file;
  bool have_format = false;
  while (true) {
    if (!std::getline(is, line)) fail(ErrorKind::Data, "ply: header not terminated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.empty()) continue;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt == "ascii") file.format = Format::Ascii;
      else if (fmt == "binary_little_endian") file.format = Format::BinaryLittleEndian;
      else fail(ErrorKind::Data, "ply: unsupported format '" + fmt + "'");
      have_format = true;
    } else if (key == "comment" || key == "obj_info") {
      std::string rest;
      std::getline(ls >> std::ws, rest);
      if (key == "comment") file.comments.push_back(rest);
    } else if (key == "element") {
      Element e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || count < 0) fail(ErrorKind::Data, "ply: bad element line '" + line + "'");
      e.count = static_cast<std::size_t>(count);
      file.elements.push_back(std::move(e));
    } else if (key == "property") {
      if (file.elements.empty()) fail(ErrorKind::Data, "ply: property before element");
      Property p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_type(ct);
        p.type = parse_type(it);
      } else {
        p.type = parse_type(t);
        ls >> p.name;
      }
      if (p.name.empty()) fail(ErrorKind::Data, "ply: property without a name");
      file.elements.back().properties.push_back(std::move(p));
    } else {
      fail(ErrorKind::Data, "ply: unknown header keyword '" + key + "'");
    }
  }
  if (!have_format) fail(ErrorKind::Data, "ply: missing format line");

  for (auto& e : file.elements) {
    for (auto& p : e.properties) {
      if (p.is_list) p.lists.resize(e.count);
      else p.values.resize(e.count);
    }
    for (std::size_t r = 0; r < e.count; ++r) {
      for (auto& p : e.properties) {
        if (file.format == Format::Ascii) {
          if (p.is_list) {
            const double n = detail::read_ascii(is);
            if (n < 0) fail(ErrorKind::Data, "ply: negative list length");
            auto& l = p.lists[r];
            l.resize(static_cast<std::size_t>(n));
            for (auto& x : l) x = static_cast<std::int64_t>(detail::read_ascii(is));
          } else {
            p.values[r] = detail::read_ascii(is);
          }
        } else {
          if (p.is_list) {
            const double n = detail::read_binary(is, p.count_type);
            if (n < 0) fail(ErrorKind::Data, "ply: negative list length");
            auto& l = p.lists[r];
            l.resize(static_cast<std::size_t>(n));
            for (auto& x : l) x = static_cast<std::int64_t>(detail::read_binary(is, p.type));
          } else {
            p.values[r] = detail::read_binary(is, p.type);
          }
        }
      }
    }
  }
  return file;
}

inline void write(std::ostream& os, const File& file) {
  for (const auto& e : file.elements)
    for (const auto& p : e.properties)
      if ((p.is_list ? p.lists.size() : p.values.size()) != e.count)
        fail(ErrorKind::InvalidArgument, "ply: property '" + p.name + "' length does not match element count");

  os << "ply\n"
     << "format " << (file.format == Format::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
  for (const auto& c : file.comments) os << "comment " << c << '\n';
  for (const auto& e : file.elements) {
    os << "element " << e.name << ' ' << e.count << '\n';
    for (const auto& p : e.properties) {
      if (p.is_list)
        os << "property list " << type_name(p.count_type) << ' ' << type_name(p.type) << ' ' << p.name << '\n';
      else
        os << "property " << type_name(p.type) << ' ' << p.name << '\n';
    }
  }
  os << "end_header\n";

  for (const auto& e : file.elements) {
    for (std::size_t r = 0; r < e.count; ++r) {
      bool first = true;
      for (const auto& p : e.properties) {
        if (file.format == Format::Ascii) {
          if (p.is_list) {
            os << (first ? "" : " ") << p.lists[r].size();
            for (auto x : p.lists[r]) {
              os << ' ';
              detail::write_ascii(os, p.type, static_cast<double>(x));
            }
          } else {
            if (!first) os << ' ';
            detail::write_ascii(os, p.type, p.values[r]);
          }
          first = false;
        } else {
          if (p.is_list) {
            detail::write_binary(os, p.count_type, static_cast<double>(p.lists[r].size()));
            for (auto x : p.lists[r]) detail::write_binary(os, p.type, static_cast<double>(x));
          } else {
            detail::write_binary(os, p.type, p.values[r]);
          }
        }
      }
      if (file.format == Format::Ascii) os << '\n';
    }
  }
}

inline File read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Data, "cannot open " + path);
  return read(is);
}

inline void write_file(const std::string& path, const File& file) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::Data, "cannot write " + path);
  write(os, file);
  if (!os) fail(ErrorKind::Data, "write failed for " + path);
}

}  // namespace flowfuse::ply
