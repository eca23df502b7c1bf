#include "permguard/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "permguard/error.hpp"

namespace permguard::dataset {

using nlohmann::json;

PermissionVocabulary::PermissionVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw Error(Errc::SchemaViolation, "duplicate vocabulary entry '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> PermissionVocabulary::index_of(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureMatrix::FeatureMatrix(PermissionVocabulary vocabulary, std::vector<std::uint8_t> cells,
                             std::vector<Label> labels, std::vector<std::optional<std::string>> families,
                             std::vector<std::string> ids)
    : vocabulary_(std::move(vocabulary)),
      cells_(std::move(cells)),
      labels_(std::move(labels)),
      families_(std::move(families)),
      ids_(std::move(ids)) {
  if (cells_.size() != labels_.size() * vocabulary_.size() || families_.size() != labels_.size() ||
      ids_.size() != labels_.size()) {
    throw Error(Errc::InvalidArgument, "feature matrix parts are not aligned");
  }
  for (auto c : cells_) {
    if (c > 1) throw Error(Errc::InvalidArgument, "feature matrix cell outside {0,1}");
  }
}

std::vector<std::string> FeatureMatrix::class_names(Task task) const {
  if (task == Task::Detection) return {"-1", "+1"};
  std::set<std::string> fams;
  for (const auto& f : families_) {
    if (!f) throw Error(Errc::SchemaViolation, "family task requires a family on every row");
    fams.insert(*f);
  }
  return {fams.begin(), fams.end()};
}

std::vector<int> FeatureMatrix::class_indices(Task task) const {
  std::vector<int> y(rows());
  if (task == Task::Detection) {
    for (std::size_t i = 0; i < rows(); ++i) y[i] = labels_[i] == Label::Malware ? 1 : 0;
    return y;
  }
  const auto names = class_names(task);
  for (std::size_t i = 0; i < rows(); ++i) {
    y[i] = static_cast<int>(std::lower_bound(names.begin(), names.end(), *families_[i]) - names.begin());
  }
  return y;
}

FeatureMatrix FeatureMatrix::take_rows(std::span<const std::size_t> indices) const {
  std::vector<std::uint8_t> cells;
  cells.reserve(indices.size() * cols());
  std::vector<Label> labels;
  std::vector<std::optional<std::string>> families;
  std::vector<std::string> ids;
  for (auto i : indices) {
    const auto r = row(i);
    cells.insert(cells.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
    families.push_back(families_[i]);
    ids.push_back(ids_[i]);
  }
  return {vocabulary_, std::move(cells), std::move(labels), std::move(families), std::move(ids)};
}

FeatureMatrix FeatureMatrix::take_cols(std::span<const std::size_t> indices) const {
  std::vector<std::string> names;
  for (auto j : indices) {
    if (j >= cols()) throw Error(Errc::FeatureIndexOutOfRange, "column " + std::to_string(j));
    names.push_back(vocabulary_.name(j));
  }
  std::vector<std::uint8_t> cells;
  cells.reserve(rows() * indices.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (auto j : indices) cells.push_back(at(i, j));
  }
  return {PermissionVocabulary(std::move(names)), std::move(cells), labels_, families_, ids_};
}

FeatureMatrix FeatureMatrix::with_cells(std::vector<std::uint8_t> cells) const {
  return {vocabulary_, std::move(cells), labels_, families_, ids_};
}

PermissionVocabulary build_vocabulary(std::span<const Sample> samples) {
  if (samples.empty()) throw Error(Errc::EmptyCorpus, "cannot build a vocabulary from zero samples");
  std::set<std::string> all;
  for (const auto& s : samples) all.insert(s.permissions.begin(), s.permissions.end());
  return PermissionVocabulary({all.begin(), all.end()});
}

std::vector<std::uint8_t> vectorize(const Sample& sample, const PermissionVocabulary& vocab, std::size_t* unknown) {
  std::vector<std::uint8_t> v(vocab.size(), 0);
  for (const auto& p : sample.permissions) {
    if (const auto idx = vocab.index_of(p)) {
      v[*idx] = 1;
    } else if (unknown) {
      ++*unknown;
    }
  }
  return v;
}

Vectorized vectorize_all(std::span<const Sample> samples, const PermissionVocabulary& vocab) {
  std::vector<std::uint8_t> cells;
  cells.reserve(samples.size() * vocab.size());
  std::vector<Label> labels;
  std::vector<std::optional<std::string>> families;
  std::vector<std::string> ids;
  std::size_t unknown = 0;
  for (const auto& s : samples) {
    const auto v = vectorize(s, vocab, &unknown);
    cells.insert(cells.end(), v.begin(), v.end());
    labels.push_back(s.label);
    families.push_back(s.family);
    ids.push_back(s.id);
  }
  return {FeatureMatrix(vocab, std::move(cells), std::move(labels), std::move(families), std::move(ids)), unknown};
}

FeatureMatrix to_matrix(std::span<const Sample> samples) {
  return vectorize_all(samples, build_vocabulary(samples)).matrix;
}

void validate(const Sample& s) {
  if (s.id.empty()) throw Error(Errc::SchemaViolation, "sample with empty id");
  if (s.label != Label::Malware && s.label != Label::Benign) {
    throw Error(Errc::SchemaViolation, "sample '" + s.id + "' has a label outside {+1,-1}");
  }
  if (s.family && s.label == Label::Benign) {
    throw Error(Errc::SchemaViolation, "benign sample '" + s.id + "' carries a family");
  }
  for (const auto& p : s.permissions) {
    if (p.empty()) throw Error(Errc::SchemaViolation, "sample '" + s.id + "' has an empty permission name");
  }
}

namespace {

json to_json(const Sample& s) {
  // keys are emitted sorted, so output is byte-stable
  json j;
  j["id"] = s.id;
  j["label"] = to_int(s.label);
  if (s.family) j["family"] = *s.family;
  j["permissions"] = json::array();
  for (const auto& p : s.permissions) j["permissions"].push_back(p);
  return j;
}

Sample from_json(const json& j, const std::string& where) {
  auto violation = [&](const std::string& what) { return Error(Errc::SchemaViolation, where + ": " + what); };
  if (!j.is_object()) throw violation("record is not an object");
  for (const char* field : {"id", "label", "permissions"}) {
    if (!j.contains(field)) throw violation(std::string("missing field '") + field + "'");
  }
  Sample s;
  if (!j["id"].is_string()) throw violation("'id' must be text");
  s.id = j["id"].get<std::string>();
  if (!j["label"].is_number_integer()) throw violation("'label' must be +1 or -1");
  const auto label = j["label"].get<long long>();
  if (label != 1 && label != -1) throw violation("'label' must be +1 or -1, got " + std::to_string(label));
  s.label = static_cast<Label>(label);
  if (j.contains("family") && !j["family"].is_null()) {
    if (!j["family"].is_string()) throw violation("'family' must be text");
    s.family = j["family"].get<std::string>();
  }
  if (!j["permissions"].is_array()) throw violation("'permissions' must be an array");
  for (const auto& p : j["permissions"]) {
    if (!p.is_string()) throw violation("permission entries must be text");
    s.permissions.insert(p.get<std::string>());
  }
  try {
    validate(s);
  } catch (const Error& e) {
    throw violation(e.what());
  }
  return s;
}

}  // namespace

std::string serialize_corpus(std::span<const Sample> samples) {
  std::string out;
  std::unordered_set<std::string> seen;
  for (const auto& s : samples) {
    validate(s);
    if (!seen.insert(s.id).second) throw Error(Errc::DuplicateId, "duplicate sample id '" + s.id + "'");
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

std::vector<Sample> parse_corpus(const std::string& text, const std::string& origin) {
  std::vector<Sample> samples;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(Errc::SchemaViolation, where + ": " + e.what());
    }
    Sample s = from_json(j, where);
    if (!seen.insert(s.id).second) throw Error(Errc::DuplicateId, where + ": duplicate id '" + s.id + "'");
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<Sample> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open corpus " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), path.string());
}

void save_corpus(std::span<const Sample> samples, const std::filesystem::path& path) {
  const std::string text = serialize_corpus(samples);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write corpus " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

PermissionVocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open vocabulary " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    names.push_back(line);
  }
  return PermissionVocabulary(std::move(names));
}

void save_vocabulary(const PermissionVocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write vocabulary " + path.string());
  for (const auto& n : vocab.names()) out << n << '\n';
}

}  // namespace permguard::dataset
