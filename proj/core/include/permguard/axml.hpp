#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace permguard::axml {

// Chunk type constants of the binary manifest container.
inline constexpr std::uint16_t kStringPool = 0x0001;
inline constexpr std::uint16_t kXmlDocument = 0x0003;
inline constexpr std::uint16_t kNamespaceStart = 0x0100;
inline constexpr std::uint16_t kNamespaceEnd = 0x0101;
inline constexpr std::uint16_t kElementStart = 0x0102;
inline constexpr std::uint16_t kElementEnd = 0x0103;
inline constexpr std::uint16_t kCdata = 0x0104;
inline constexpr std::uint16_t kResourceMap = 0x0180;

inline constexpr std::uint32_t kUtf8Flag = 1u << 8;
inline constexpr std::uint32_t kNoIndex = 0xFFFFFFFFu;
/// Framework resource id of the `android:name` attribute.
inline constexpr std::uint32_t kAndroidNameResId = 0x01010003u;
inline constexpr std::uint8_t kTypeString = 0x03;

struct Chunk {
  std::uint16_t type = 0;
  std::uint16_t header_size = 0;
  std::uint32_t total_size = 0;
  /// Whole chunk, header included.
  std::span<const std::uint8_t> bytes;
};

struct ManifestInfo {
  std::string package_name;
  std::set<std::string> permissions;
  std::size_t raw_attribute_count = 0;

  bool operator==(const ManifestInfo&) const = default;
};

/// Reads the chunk header at `offset`. Throws TruncatedInput when the chunk
/// runs past the end and MalformedHeader when its size fields disagree.
Chunk read_chunk(std::span<const std::uint8_t> bytes, std::size_t offset);

/// Extracts requested permissions from a binary manifest.
ManifestInfo parse_axml(std::span<const std::uint8_t> bytes);

/// Same extraction over a plain-text manifest.
ManifestInfo parse_text_manifest(std::string_view text);

/// Dispatches on content: APK archive, binary manifest, or text manifest.
ManifestInfo parse_manifest_file(const std::filesystem::path& path);

/// Returns the raw bytes of `AndroidManifest.xml` inside an APK (zip) archive.
std::vector<std::uint8_t> read_manifest_from_apk(std::span<const std::uint8_t> archive);

/// Writes binary manifests chunk by chunk. Used for fixtures and tests; the
/// output follows the exact layout parse_axml consumes.
class AxmlBuilder {
 public:
  explicit AxmlBuilder(bool utf8 = false) : utf8_(utf8) {}

  /// Interns a string and returns its pool index.
  std::uint32_t intern(std::string_view s);

  void start_namespace(std::string_view prefix, std::string_view uri);
  void end_namespace(std::string_view prefix, std::string_view uri);

  struct Attribute {
    std::string ns;    // empty = no namespace
    std::string name;
    std::string value;
    /// Writes the name as an empty pool string resolved through the resource
    /// map, the way aapt2 emits framework attributes.
    bool via_resource_map = false;
  };
  void start_element(std::string_view name, const std::vector<Attribute>& attributes);
  void end_element(std::string_view name);

  /// Appends an arbitrary chunk with the given type and payload.
  void raw_chunk(std::uint16_t type, std::span<const std::uint8_t> payload);

  std::vector<std::uint8_t> finish() const;

 private:
  bool utf8_;
  std::vector<std::string> strings_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> resource_ids_;  // pool index -> res id
  std::vector<std::uint8_t> body_;
};

/// Convenience: a complete manifest for `package` requesting `permissions`.
std::vector<std::uint8_t> build_manifest(std::string_view package,
                                         const std::vector<std::string>& permissions,
                                         bool utf8 = false);

}  // namespace permguard::axml
