#include "permguard/axml.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <unordered_map>

#include "permguard/error.hpp"

namespace permguard::axml {
namespace {

constexpr std::string_view kAndroidUri = "http://schemas.android.com/apk/res/android";

std::uint16_t u16_at(std::span<const std::uint8_t> b, std::size_t off) {
  if (off + 2 > b.size()) throw Error(Errc::TruncatedInput, "u16 read past end at offset " + std::to_string(off));
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t u32_at(std::span<const std::uint8_t> b, std::size_t off) {
  if (off + 4 > b.size()) throw Error(Errc::TruncatedInput, "u32 read past end at offset " + std::to_string(off));
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string utf16_to_utf8(std::span<const std::uint8_t> b, std::size_t off, std::size_t units) {
  std::string out;
  out.reserve(units);
  for (std::size_t i = 0; i < units; ++i) {
    std::uint32_t cu = u16_at(b, off + 2 * i);
    if (cu >= 0xD800 && cu < 0xDC00 && i + 1 < units) {
      const std::uint32_t lo = u16_at(b, off + 2 * (i + 1));
      if (lo >= 0xDC00 && lo < 0xE000) {
        cu = 0x10000 + ((cu - 0xD800) << 10) + (lo - 0xDC00);
        ++i;
      }
    }
    append_utf8(out, cu);
  }
  return out;
}

std::vector<std::uint8_t> utf8_to_utf16le(std::string_view s) {
  std::vector<std::uint8_t> out;
  auto put = [&out](std::uint32_t u) {
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  };
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::uint32_t cp;
    std::size_t len;
    if (c < 0x80) {
      cp = c, len = 1;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F, len = 2;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F, len = 3;
    } else {
      cp = c & 0x07, len = 4;
    }
    for (std::size_t k = 1; k < len && i + k < s.size(); ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    i += len;
    if (cp >= 0x10000) {
      cp -= 0x10000;
      put(0xD800 + (cp >> 10));
      put(0xDC00 + (cp & 0x3FF));
    } else {
      put(cp);
    }
  }
  return out;
}

class StringPool {
 public:
  StringPool() = default;

  explicit StringPool(const Chunk& chunk) {
    const auto b = chunk.bytes;
    if (chunk.header_size < 28) throw Error(Errc::MalformedHeader, "string pool header shorter than 28 bytes");
    const std::uint32_t count = u32_at(b, 8);
    const std::uint32_t flags = u32_at(b, 16);
    const std::uint32_t strings_start = u32_at(b, 20);
    const bool utf8 = (flags & kUtf8Flag) != 0;
    if (static_cast<std::uint64_t>(chunk.header_size) + 4ull * count > b.size()) {
      throw Error(Errc::TruncatedInput, "string pool offset table past end of chunk");
    }
    strings_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::size_t off = static_cast<std::size_t>(strings_start) + u32_at(b, chunk.header_size + 4u * i);
      strings_.push_back(utf8 ? decode_utf8(b, off) : decode_utf16(b, off));
    }
  }

  std::size_t size() const { return strings_.size(); }

  const std::string& at(std::uint32_t index) const {
    if (index >= strings_.size()) {
      throw Error(Errc::StringIndexOutOfRange,
                  "string index " + std::to_string(index) + " >= pool size " + std::to_string(strings_.size()));
    }
    return strings_[index];
  }

  /// Absent for the no-index sentinel.
  std::optional<std::string> lookup(std::uint32_t index) const {
    if (index == kNoIndex) return std::nullopt;
    return at(index);
  }

 private:
  static std::string decode_utf16(std::span<const std::uint8_t> b, std::size_t off) {
    std::size_t len = u16_at(b, off);
    off += 2;
    if (len & 0x8000) {
      len = ((len & 0x7FFF) << 16) | u16_at(b, off);
      off += 2;
    }
    if (off + 2 * len > b.size()) throw Error(Errc::TruncatedInput, "UTF-16 string past end of pool");
    return utf16_to_utf8(b, off, len);
  }

  static std::size_t utf8_length(std::span<const std::uint8_t> b, std::size_t& off) {
    if (off >= b.size()) throw Error(Errc::TruncatedInput, "UTF-8 length past end of pool");
    std::size_t len = b[off++];
    if (len & 0x80) {
      if (off >= b.size()) throw Error(Errc::TruncatedInput, "UTF-8 length past end of pool");
      len = ((len & 0x7F) << 8) | b[off++];
    }
    return len;
  }

  static std::string decode_utf8(std::span<const std::uint8_t> b, std::size_t off) {
    utf8_length(b, off);  // UTF-16 length, unused
    const std::size_t len = utf8_length(b, off);
    if (off + len > b.size()) throw Error(Errc::TruncatedInput, "UTF-8 string past end of pool");
    return std::string(reinterpret_cast<const char*>(b.data() + off), len);
  }

  std::vector<std::string> strings_;
};

}  // namespace

Chunk read_chunk(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (offset + 8 > bytes.size()) throw Error(Errc::TruncatedInput, "chunk header past end at offset " + std::to_string(offset));
  Chunk c;
  c.type = u16_at(bytes, offset);
  c.header_size = u16_at(bytes, offset + 2);
  c.total_size = u32_at(bytes, offset + 4);
  if (c.header_size < 8 || c.header_size > c.total_size) {
    throw Error(Errc::MalformedHeader, "inconsistent chunk sizes at offset " + std::to_string(offset) +
                                           " (header " + std::to_string(c.header_size) + ", total " +
                                           std::to_string(c.total_size) + ")");
  }
  if (c.total_size > bytes.size() - offset) {
    throw Error(Errc::TruncatedInput, "chunk at offset " + std::to_string(offset) + " extends past end of input");
  }
  c.bytes = bytes.subspan(offset, c.total_size);
  return c;
}

ManifestInfo parse_axml(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(Errc::MalformedHeader, "empty input");
  if (bytes.size() < 2 || u16_at(bytes, 0) != kXmlDocument) {
    throw Error(Errc::MalformedHeader, "first chunk is not an XML document");
  }
  const Chunk doc = read_chunk(bytes, 0);

  ManifestInfo info;
  StringPool pool;
  std::vector<std::uint32_t> resource_ids;

  auto is_name_attr = [&](std::uint32_t name_index) {
    if (name_index < resource_ids.size() && resource_ids[name_index] == kAndroidNameResId) return true;
    return pool.at(name_index) == "name";
  };

  std::size_t off = doc.header_size;
  while (off < doc.total_size) {
    const Chunk c = read_chunk(doc.bytes, off);
    switch (c.type) {
      case kStringPool:
        pool = StringPool(c);
        break;
      case kResourceMap: {
        resource_ids.clear();
        for (std::size_t p = c.header_size; p + 4 <= c.total_size; p += 4) resource_ids.push_back(u32_at(c.bytes, p));
        break;
      }
      case kElementStart: {
        const std::size_t ext = c.header_size;
        const std::string& name = pool.at(u32_at(c.bytes, ext + 4));
        const std::uint16_t attr_start = u16_at(c.bytes, ext + 8);
        const std::uint16_t attr_size = u16_at(c.bytes, ext + 10);
        const std::uint16_t attr_count = u16_at(c.bytes, ext + 12);
        if (attr_count > 0 && attr_size < 20) throw Error(Errc::MalformedHeader, "attribute record shorter than 20 bytes");
        info.raw_attribute_count += attr_count;
        for (std::uint16_t a = 0; a < attr_count; ++a) {
          const std::size_t at = ext + attr_start + static_cast<std::size_t>(a) * attr_size;
          const std::uint32_t attr_name = u32_at(c.bytes, at + 4);
          const std::uint32_t raw_value = u32_at(c.bytes, at + 8);
          const std::uint32_t data = u32_at(c.bytes, at + 16);
          const std::uint8_t data_type = c.bytes[at + 15];
          std::optional<std::string> value = pool.lookup(raw_value);
          if (!value && data_type == kTypeString) value = pool.at(data);
          if (name == "uses-permission") {
            if (is_name_attr(attr_name) && value && !value->empty()) info.permissions.insert(*value);
          } else if (name == "manifest") {
            if (pool.at(attr_name) == "package" && value) info.package_name = *value;
          }
        }
        break;
      }
      default:
        // namespaces, element ends, CDATA, and unknown chunks carry nothing we need
        break;
    }
    off += c.total_size;
  }
  return info;
}

// --- text manifests ---------------------------------------------------------

namespace {

class XmlScanner {
 public:
  explicit XmlScanner(std::string_view text) : s_(text) {}

  ManifestInfo run() {
    ManifestInfo info;
    std::vector<std::string> stack;
    std::vector<std::unordered_map<std::string, std::string>> ns_scopes;
    bool seen_root = false;
    while (pos_ < s_.size()) {
      if (s_[pos_] != '<') {
        ++pos_;
        continue;
      }
      if (starts_with("<?")) {
        skip_past("?>");
      } else if (starts_with("<!--")) {
        skip_past("-->");
      } else if (starts_with("<![CDATA[")) {
        skip_past("]]>");
      } else if (starts_with("<!")) {
        skip_past(">");
      } else if (starts_with("</")) {
        pos_ += 2;
        const std::string name = read_name();
        skip_ws();
        expect('>');
        if (stack.empty() || stack.back() != name) fail("unexpected closing tag </" + name + ">");
        stack.pop_back();
        ns_scopes.pop_back();
      } else {
        ++pos_;
        const std::string name = read_name();
        if (stack.empty() && seen_root) fail("content after root element");
        seen_root = true;
        std::vector<std::pair<std::string, std::string>> attrs;
        bool self_closing = false;
        for (;;) {
          skip_ws();
          if (pos_ >= s_.size()) fail("unterminated tag <" + name + ">");
          if (s_[pos_] == '/') {
            ++pos_;
            expect('>');
            self_closing = true;
            break;
          }
          if (s_[pos_] == '>') {
            ++pos_;
            break;
          }
          std::string attr = read_name();
          skip_ws();
          expect('=');
          skip_ws();
          attrs.emplace_back(std::move(attr), read_quoted());
        }
        std::unordered_map<std::string, std::string> scope = ns_scopes.empty() ? std::unordered_map<std::string, std::string>{} : ns_scopes.back();
        for (const auto& [k, v] : attrs) {
          if (k.rfind("xmlns:", 0) == 0) scope[k.substr(6)] = v;
        }
        info.raw_attribute_count += attrs.size();
        interpret(name, attrs, scope, info);
        if (!self_closing) {
          stack.push_back(name);
          ns_scopes.push_back(std::move(scope));
        }
      }
    }
    if (!stack.empty()) fail("unclosed element <" + stack.back() + ">");
    if (!seen_root) fail("no root element");
    return info;
  }

 private:
  static void interpret(const std::string& element, const std::vector<std::pair<std::string, std::string>>& attrs,
                        const std::unordered_map<std::string, std::string>& scope, ManifestInfo& info) {
    for (const auto& [k, v] : attrs) {
      if (element == "manifest" && k == "package") info.package_name = v;
      if (element != "uses-permission") continue;
      const auto colon = k.find(':');
      if (colon == std::string::npos || k.substr(colon + 1) != "name") continue;
      const std::string prefix = k.substr(0, colon);
      const auto bound = scope.find(prefix);
      const bool android = prefix == "android" || (bound != scope.end() && bound->second == kAndroidUri);
      if (android && !v.empty()) info.permissions.insert(v);
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::XmlSyntax, what + " (offset " + std::to_string(pos_) + ")");
  }

  bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

  void skip_past(std::string_view terminator) {
    const auto end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated markup");
    pos_ = end + terminator.size();
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string read_name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '/' || c == '>' || c == '=' || c == '<') break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string read_quoted() {
    if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("expected quoted attribute value");
    const char q = s_[pos_++];
    const auto end = s_.find(q, pos_);
    if (end == std::string_view::npos) fail("unterminated attribute value");
    std::string value = decode_entities(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return value;
  }

  std::string decode_entities(std::string_view raw) const {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      const std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else if (!ent.empty() && ent[0] == '#') {
        const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
        const std::string digits(ent.substr(hex ? 2 : 1));
        try {
          append_utf8(out, static_cast<std::uint32_t>(std::stoul(digits, nullptr, hex ? 16 : 10)));
        } catch (const std::exception&) {
          fail("bad character reference");
        }
      } else {
        fail("unknown entity &" + std::string(ent) + ";");
      }
      i = semi;
    }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ManifestInfo parse_text_manifest(std::string_view text) { return XmlScanner(text).run(); }

// --- APK archives -----------------------------------------------------------

std::vector<std::uint8_t> read_manifest_from_apk(std::span<const std::uint8_t> archive) {
  constexpr std::uint32_t kEocd = 0x06054b50, kCentral = 0x02014b50, kLocal = 0x04034b50;
  if (archive.size() < 22) throw Error(Errc::NotAnArchive, "too short for a zip archive");
  std::size_t eocd = archive.size() - 22;
  const std::size_t floor = archive.size() > 22 + 0xFFFF ? archive.size() - 22 - 0xFFFF : 0;
  while (u32_at(archive, eocd) != kEocd) {
    if (eocd == floor) throw Error(Errc::NotAnArchive, "no end-of-central-directory record");
    --eocd;
  }
  const std::uint16_t entries = u16_at(archive, eocd + 10);
  std::size_t p = u32_at(archive, eocd + 16);
  for (std::uint16_t e = 0; e < entries; ++e) {
    if (u32_at(archive, p) != kCentral) throw Error(Errc::NotAnArchive, "bad central directory entry");
    const std::uint16_t method = u16_at(archive, p + 10);
    const std::uint32_t comp_size = u32_at(archive, p + 20);
    const std::uint32_t raw_size = u32_at(archive, p + 24);
    const std::uint16_t name_len = u16_at(archive, p + 28);
    const std::uint16_t extra_len = u16_at(archive, p + 30);
    const std::uint16_t comment_len = u16_at(archive, p + 32);
    const std::uint32_t local = u32_at(archive, p + 42);
    if (p + 46 + name_len > archive.size()) throw Error(Errc::TruncatedInput, "central directory name past end");
    const std::string_view name(reinterpret_cast<const char*>(archive.data() + p + 46), name_len);
    p += 46u + name_len + extra_len + comment_len;
    if (name != "AndroidManifest.xml") continue;

    if (u32_at(archive, local) != kLocal) throw Error(Errc::NotAnArchive, "bad local file header");
    const std::size_t data = local + 30u + u16_at(archive, local + 26) + u16_at(archive, local + 28);
    if (data + comp_size > archive.size()) throw Error(Errc::TruncatedInput, "manifest entry past end of archive");
    const auto compressed = archive.subspan(data, comp_size);
    if (method == 0) return {compressed.begin(), compressed.end()};
    if (method != 8) throw Error(Errc::NotAnArchive, "unsupported compression method " + std::to_string(method));

    std::vector<std::uint8_t> out(raw_size);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(Errc::NotAnArchive, "inflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(compressed.data());
    zs.avail_in = static_cast<uInt>(compressed.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error(Errc::TruncatedInput, "deflate stream for manifest is incomplete");
    return out;
  }
  throw Error(Errc::NotAnArchive, "archive has no AndroidManifest.xml");
}

ManifestInfo parse_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && bytes[0] == 'P' && bytes[1] == 'K' && bytes[2] == 3 && bytes[3] == 4) {
    return parse_axml(read_manifest_from_apk(bytes));
  }
  if (bytes.size() >= 2 && bytes[0] == 0x03 && bytes[1] == 0x00) return parse_axml(bytes);
  const auto first = std::find_if(bytes.begin(), bytes.end(), [](std::uint8_t c) { return c != ' ' && c != '\n' && c != '\r' && c != '\t' && c != 0xEF && c != 0xBB && c != 0xBF; });
  if (first != bytes.end() && *first == '<') {
    return parse_text_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return parse_axml(bytes);
}

// --- builder ----------------------------------------------------------------

namespace {

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_chunk(std::vector<std::uint8_t>& out, std::uint16_t type, std::uint16_t header_size,
               std::span<const std::uint8_t> header_ext, std::span<const std::uint8_t> body) {
  put16(out, type);
  put16(out, header_size);
  put32(out, static_cast<std::uint32_t>(8 + header_ext.size() + body.size()));
  out.insert(out.end(), header_ext.begin(), header_ext.end());
  out.insert(out.end(), body.begin(), body.end());
}

}  // namespace

std::uint32_t AxmlBuilder::intern(std::string_view s) {
  const auto it = std::find(strings_.begin(), strings_.end(), s);
  if (it != strings_.end()) return static_cast<std::uint32_t>(it - strings_.begin());
  strings_.emplace_back(s);
  return static_cast<std::uint32_t>(strings_.size() - 1);
}

void AxmlBuilder::start_namespace(std::string_view prefix, std::string_view uri) {
  std::vector<std::uint8_t> ext, body;
  put32(ext, 1);          // line number
  put32(ext, kNoIndex);   // comment
  put32(body, intern(prefix));
  put32(body, intern(uri));
  put_chunk(body_, kNamespaceStart, 16, ext, body);
}

void AxmlBuilder::end_namespace(std::string_view prefix, std::string_view uri) {
  std::vector<std::uint8_t> ext, body;
  put32(ext, 1);
  put32(ext, kNoIndex);
  put32(body, intern(prefix));
  put32(body, intern(uri));
  put_chunk(body_, kNamespaceEnd, 16, ext, body);
}

void AxmlBuilder::start_element(std::string_view name, const std::vector<Attribute>& attributes) {
  std::vector<std::uint8_t> ext, body;
  put32(ext, 1);
  put32(ext, kNoIndex);
  put32(body, kNoIndex);  // element namespace
  put32(body, intern(name));
  put16(body, 20);  // attribute start, relative to this extension
  put16(body, 20);  // attribute record size
  put16(body, static_cast<std::uint16_t>(attributes.size()));
  put16(body, 0);  // id index
  put16(body, 0);  // class index
  put16(body, 0);  // style index
  for (const auto& a : attributes) {
    put32(body, a.ns.empty() ? kNoIndex : intern(a.ns));
    std::uint32_t name_index;
    if (a.via_resource_map) {
      // aapt2 keeps these names in the pool but resolves them by resource id
      name_index = intern("");
      resource_ids_.emplace_back(name_index, kAndroidNameResId);
    } else {
      name_index = intern(a.name);
    }
    put32(body, name_index);
    const std::uint32_t value = intern(a.value);
    put32(body, value);
    put16(body, 8);  // typed value size
    body.push_back(0);
    body.push_back(kTypeString);
    put32(body, value);
  }
  put_chunk(body_, kElementStart, 16, ext, body);
}

void AxmlBuilder::end_element(std::string_view name) {
  std::vector<std::uint8_t> ext, body;
  put32(ext, 1);
  put32(ext, kNoIndex);
  put32(body, kNoIndex);
  put32(body, intern(name));
  put_chunk(body_, kElementEnd, 16, ext, body);
}

void AxmlBuilder::raw_chunk(std::uint16_t type, std::span<const std::uint8_t> payload) {
  put_chunk(body_, type, 8, {}, payload);
}

std::vector<std::uint8_t> AxmlBuilder::finish() const {
  // string data
  std::vector<std::uint8_t> data;
  std::vector<std::uint32_t> offsets;
  for (const auto& s : strings_) {
    offsets.push_back(static_cast<std::uint32_t>(data.size()));
    if (utf8_) {
      const std::vector<std::uint8_t> u16 = utf8_to_utf16le(s);
      auto put_len = [&data](std::size_t len) {
        if (len > 0x7F) data.push_back(static_cast<std::uint8_t>(0x80 | (len >> 8)));
        data.push_back(static_cast<std::uint8_t>(len & 0xFF));
      };
      put_len(u16.size() / 2);
      put_len(s.size());
      data.insert(data.end(), s.begin(), s.end());
      data.push_back(0);
    } else {
      const std::vector<std::uint8_t> u16 = utf8_to_utf16le(s);
      put16(data, static_cast<std::uint16_t>(u16.size() / 2));
      data.insert(data.end(), u16.begin(), u16.end());
      put16(data, 0);
    }
  }
  while (data.size() % 4 != 0) data.push_back(0);

  std::vector<std::uint8_t> pool_ext, pool_body;
  put32(pool_ext, static_cast<std::uint32_t>(strings_.size()));
  put32(pool_ext, 0);  // styles
  put32(pool_ext, utf8_ ? kUtf8Flag : 0);
  put32(pool_ext, static_cast<std::uint32_t>(28 + 4 * strings_.size()));
  put32(pool_ext, 0);
  for (auto o : offsets) put32(pool_body, o);
  pool_body.insert(pool_body.end(), data.begin(), data.end());

  std::vector<std::uint8_t> children;
  put_chunk(children, kStringPool, 28, pool_ext, pool_body);
  if (!resource_ids_.empty()) {
    std::uint32_t max_index = 0;
    for (const auto& [idx, id] : resource_ids_) max_index = std::max(max_index, idx);
    std::vector<std::uint32_t> ids(max_index + 1, 0);
    for (const auto& [idx, id] : resource_ids_) ids[idx] = id;
    std::vector<std::uint8_t> map_body;
    for (auto id : ids) put32(map_body, id);
    put_chunk(children, kResourceMap, 8, {}, map_body);
  }
  children.insert(children.end(), body_.begin(), body_.end());

  std::vector<std::uint8_t> out;
  put_chunk(out, kXmlDocument, 8, {}, children);
  return out;
}

std::vector<std::uint8_t> build_manifest(std::string_view package, const std::vector<std::string>& permissions,
                                         bool utf8) {
  AxmlBuilder b(utf8);
  b.start_namespace("android", kAndroidUri);
  b.start_element("manifest", {{"", "package", std::string(package)}});
  for (const auto& p : permissions) {
    b.start_element("uses-permission", {{std::string(kAndroidUri), "name", p}});
    b.end_element("uses-permission");
  }
  b.start_element("application", {});
  b.end_element("application");
  b.end_element("manifest");
  b.end_namespace("android", kAndroidUri);
  return b.finish();
}

}  // namespace permguard::axml
