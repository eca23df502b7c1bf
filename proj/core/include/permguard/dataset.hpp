#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace permguard::dataset {

enum class Label : int { Benign = -1, Malware = +1 };

inline int to_int(Label l) { return static_cast<int>(l); }

struct Sample {
  std::string id;
  std::set<std::string> permissions;
  Label label = Label::Benign;
  std::optional<std::string> family;  // malware only

  bool operator==(const Sample&) const = default;
};

/// Ordered, duplicate-free permission names; position = feature index.
class PermissionVocabulary {
 public:
  PermissionVocabulary() = default;
  /// Names must already be unique; they are kept in the given order.
  explicit PermissionVocabulary(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  std::optional<std::size_t> index_of(const std::string& name) const;

  bool operator==(const PermissionVocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
};

/// Which column of a FeatureMatrix drives supervised learning.
enum class Task { Detection, Family };

/// Dense binary matrix, row-major, with aligned labels, families and ids.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(PermissionVocabulary vocabulary, std::vector<std::uint8_t> cells, std::vector<Label> labels,
                std::vector<std::optional<std::string>> families, std::vector<std::string> ids);

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return vocabulary_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const std::uint8_t> row(std::size_t i) const { return {cells_.data() + i * cols(), cols()}; }
  std::uint8_t at(std::size_t i, std::size_t j) const { return cells_[i * cols() + j]; }
  std::span<const std::uint8_t> cells() const { return cells_; }

  const PermissionVocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<std::optional<std::string>>& families() const { return families_; }
  const std::vector<std::string>& ids() const { return ids_; }

  /// Class names for a task: ("-1", "+1") for detection, sorted distinct
  /// families for family classification.
  std::vector<std::string> class_names(Task task) const;
  /// Per-row index into class_names(task).
  std::vector<int> class_indices(Task task) const;

  /// Rows in the given order (duplicates allowed).
  FeatureMatrix take_rows(std::span<const std::size_t> indices) const;
  /// Columns in the given order; the vocabulary follows.
  FeatureMatrix take_cols(std::span<const std::size_t> indices) const;
  /// Same rows and metadata, replaced cell values.
  FeatureMatrix with_cells(std::vector<std::uint8_t> cells) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  PermissionVocabulary vocabulary_;
  std::vector<std::uint8_t> cells_;
  std::vector<Label> labels_;
  std::vector<std::optional<std::string>> families_;
  std::vector<std::string> ids_;
};

/// Sorted union of all permission names. Throws EmptyCorpus on no samples.
PermissionVocabulary build_vocabulary(std::span<const Sample> samples);

/// Binary indicator vector. Permissions outside the vocabulary are dropped and
/// counted into `unknown` when given.
std::vector<std::uint8_t> vectorize(const Sample& sample, const PermissionVocabulary& vocab,
                                    std::size_t* unknown = nullptr);

struct Vectorized {
  FeatureMatrix matrix;
  std::size_t unknown_permissions = 0;
};
Vectorized vectorize_all(std::span<const Sample> samples, const PermissionVocabulary& vocab);

/// Builds the vocabulary from `samples` and vectorizes them.
FeatureMatrix to_matrix(std::span<const Sample> samples);

/// Line-delimited JSON records: id, label (+1/-1), family (malware only), permissions.
std::vector<Sample> load_corpus(const std::filesystem::path& path);
void save_corpus(std::span<const Sample> samples, const std::filesystem::path& path);
std::string serialize_corpus(std::span<const Sample> samples);
std::vector<Sample> parse_corpus(const std::string& text, const std::string& origin = "<memory>");

/// One permission name per line.
PermissionVocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const PermissionVocabulary& vocab, const std::filesystem::path& path);

/// Checks the Sample invariants; throws SchemaViolation.
void validate(const Sample& sample);

}  // namespace permguard::dataset
