#pragma once

// Lexical-sample data in the CoarseWSD-20 directory layout:
//
//   <root>/<word>/classes_map.txt     {"0": "apple_inc", "1": "apple"}
//   <root>/<word>/{train,test}.data.txt  "<target_index>\t<tokens...>"
//   <root>/<word>/{train,test}.gold.txt  one sense id per line

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uwsd/error.hpp"
#include "uwsd/util.hpp"

namespace uwsd {

namespace fs = std::filesystem;

enum class Split { train, test };

inline const char* to_string(Split split) {
  return split == Split::train ? "train" : "test";
}

// The 20 target words of the benchmark.
inline constexpr std::array<std::string_view, 20> kBenchmarkWords = {
    "apple", "arm",  "bank",    "bass",  "bow",  "chair",  "club",
    "crane", "deck", "digit",   "hood",  "java", "mole",   "pitcher",
    "pound", "seal", "spring",  "square", "trunk", "yard"};

struct Instance {
  std::string id;  // "<word>.<split>.<line>"
  std::string target_word;
  std::size_t target_index = 0;
  std::vector<std::string> tokens;
  std::optional<int> gold_sense;
  Split split = Split::test;

  const std::string& target_token() const { return tokens.at(target_index); }

  bool operator==(const Instance&) const = default;
};

struct Sense {
  int id = 0;
  std::string label;
  std::string descriptor;

  bool operator==(const Sense&) const = default;
};

struct SenseInventory {
  std::string target_word;
  std::vector<Sense> senses;  // senses[i].id == i

  std::size_t size() const { return senses.size(); }
  bool contains(int sense_id) const {
    return sense_id >= 0 && static_cast<std::size_t>(sense_id) < senses.size();
  }
  const Sense& sense(int sense_id) const {
    if (!contains(sense_id))
      throw Error(ErrorKind::schema, "word '" + target_word + "' has no sense id " +
                                         std::to_string(sense_id));
    return senses[static_cast<std::size_t>(sense_id)];
  }

  bool operator==(const SenseInventory&) const = default;
};

struct WordData {
  SenseInventory inventory;
  std::vector<Instance> train;
  std::vector<Instance> test;

  const std::vector<Instance>& instances(Split split) const {
    return split == Split::train ? train : test;
  }

  bool operator==(const WordData&) const = default;
};

// Immutable after loading; safe for concurrent reads.
struct Dataset {
  std::map<std::string, WordData> words;

  const WordData& word(const std::string& name) const {
    auto it = words.find(name);
    if (it == words.end()) {
      std::string known;
      for (const auto& [w, _] : words) known += (known.empty() ? "" : ", ") + w;
      throw Error(ErrorKind::usage, "unknown word '" + name + "' (known: " + known + ")");
    }
    return it->second;
  }

  std::size_t instance_count(Split split) const {
    std::size_t n = 0;
    for (const auto& [_, data] : words) n += data.instances(split).size();
    return n;
  }

  bool operator==(const Dataset&) const = default;
};

struct LoadOptions {
  // Require every benchmark word to be present when no filter is given.
  bool require_full_benchmark = false;
};

// Default descriptor: underscores become spaces, then lowercase.
inline std::string normalize_label(std::string_view label) {
  std::string out(label);
  std::replace(out.begin(), out.end(), '_', ' ');
  out = to_lower(out);
  auto words = split_whitespace(out);
  std::string joined;
  for (const auto& w : words) joined += (joined.empty() ? "" : " ") + w;
  return joined;
}

// Whitespace tokens of a descriptor with surrounding punctuation removed,
// so "bass (fish)" yields {"bass", "fish"}.
inline std::vector<std::string> descriptor_tokens(std::string_view descriptor) {
  std::vector<std::string> out;
  for (auto& tok : split_whitespace(descriptor)) {
    std::size_t b = 0, e = tok.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
    if (e > b) out.push_back(tok.substr(b, e - b));
  }
  return out;
}

using DescriptorOverrides = std::map<int, std::string>;

inline SenseInventory build_sense_descriptors(SenseInventory inventory,
                                              const DescriptorOverrides& overrides = {}) {
  for (const auto& [id, _] : overrides) {
    if (!inventory.contains(id))
      throw Error(ErrorKind::usage, "descriptor override for word '" + inventory.target_word +
                                        "' references unknown sense id " + std::to_string(id));
  }
  for (auto& sense : inventory.senses) {
    auto it = overrides.find(sense.id);
    sense.descriptor = it != overrides.end() ? it->second : normalize_label(sense.label);
    if (split_whitespace(sense.descriptor).empty())
      throw Error(ErrorKind::schema, "empty descriptor for sense " + std::to_string(sense.id) +
                                         " of word '" + inventory.target_word + "'");
  }
  return inventory;
}

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw file_error(ErrorKind::io, file, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Lines of a text file; a single trailing newline does not yield an empty line.
inline std::vector<std::string> read_lines(const fs::path& file) {
  std::string text = read_file(file);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    lines.emplace_back(strip_cr(std::string_view(text).substr(start, nl - start)));
    start = nl + 1;
  }
  return lines;
}

inline SenseInventory read_classes_map(const fs::path& file, const std::string& word) {
  std::string text = read_file(file);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw file_error(ErrorKind::parse, file, line_of_offset(text, e.byte), "invalid JSON");
  }
  if (!doc.is_object()) throw file_error(ErrorKind::parse, file, 1, "expected a JSON object");

  std::map<int, std::string> by_id;
  for (const auto& [key, value] : doc.items()) {
    auto id = parse_int<int>(key);
    if (!id || *id < 0)
      throw file_error(ErrorKind::parse, file, 0, "sense id '" + key + "' is not a non-negative integer");
    if (!value.is_string())
      throw file_error(ErrorKind::parse, file, 0, "label for sense " + key + " is not a string");
    by_id[*id] = value.get<std::string>();
  }
  if (by_id.size() < 2)
    throw file_error(ErrorKind::schema, file, 0, "a word needs at least 2 senses");

  SenseInventory inv;
  inv.target_word = word;
  std::set<std::string> labels;
  int expected = 0;
  for (auto& [id, label] : by_id) {
    if (id != expected)
      throw file_error(ErrorKind::schema, file, 0,
                       "sense ids must be contiguous from 0; missing " + std::to_string(expected));
    if (label.empty()) throw file_error(ErrorKind::schema, file, 0, "empty label for sense " + std::to_string(id));
    if (!labels.insert(label).second)
      throw file_error(ErrorKind::schema, file, 0, "duplicate label '" + label + "'");
    inv.senses.push_back({id, label, {}});
    ++expected;
  }
  return build_sense_descriptors(std::move(inv));
}

inline std::vector<Instance> read_split(const fs::path& dir, const std::string& word,
                                        Split split, const SenseInventory& inventory) {
  const fs::path data_file = dir / (std::string(to_string(split)) + ".data.txt");
  const fs::path gold_file = dir / (std::string(to_string(split)) + ".gold.txt");
  if (!fs::exists(data_file)) throw file_error(ErrorKind::io, data_file, 0, "missing file");
  if (!fs::exists(gold_file)) throw file_error(ErrorKind::io, gold_file, 0, "missing file");

  const auto data = read_lines(data_file);
  const auto gold = read_lines(gold_file);
  if (data.size() != gold.size())
    throw file_error(ErrorKind::schema, gold_file, 0,
                     std::to_string(gold.size()) + " gold lines but " + data_file.filename().string() +
                         " has " + std::to_string(data.size()));

  std::vector<Instance> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = data[i];
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos)
      throw file_error(ErrorKind::parse, data_file, lineno, "expected 2 tab-separated fields");
    auto index = parse_int<std::size_t>(line.substr(0, tab));
    if (!index) throw file_error(ErrorKind::parse, data_file, lineno, "target index is not a non-negative integer");

    Instance inst;
    inst.id = word + "." + to_string(split) + "." + std::to_string(lineno);
    inst.target_word = word;
    inst.target_index = *index;
    inst.tokens = split_whitespace(line.substr(tab + 1));
    inst.split = split;
    if (inst.tokens.empty()) throw file_error(ErrorKind::parse, data_file, lineno, "no tokens");
    if (inst.target_index >= inst.tokens.size())
      throw file_error(ErrorKind::parse, data_file, lineno,
                       "target index " + std::to_string(inst.target_index) + " out of range for " +
                           std::to_string(inst.tokens.size()) + " tokens");

    auto sense = parse_int<int>(gold[i]);
    if (!sense) throw file_error(ErrorKind::parse, gold_file, lineno, "gold sense is not an integer");
    if (!inventory.contains(*sense))
      throw file_error(ErrorKind::schema, gold_file, lineno,
                       "sense id " + std::to_string(*sense) + " absent from classes_map.txt");
    inst.gold_sense = *sense;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace detail

inline WordData load_word(const fs::path& dir, const std::string& word) {
  const fs::path classes = dir / "classes_map.txt";
  if (!fs::exists(classes)) throw file_error(ErrorKind::io, classes, 0, "missing file");
  WordData data;
  data.inventory = detail::read_classes_map(classes, word);
  data.train = detail::read_split(dir, word, Split::train, data.inventory);
  data.test = detail::read_split(dir, word, Split::test, data.inventory);
  return data;
}

inline Dataset load_dataset(const fs::path& root,
                            const std::optional<std::vector<std::string>>& word_filter = std::nullopt,
                            const LoadOptions& options = {}) {
  if (!fs::is_directory(root)) throw file_error(ErrorKind::io, root, 0, "dataset root is not a directory");

  std::vector<std::string> words;
  if (word_filter) {
    for (const auto& w : *word_filter) {
      if (!fs::is_directory(root / w))
        throw file_error(ErrorKind::io, root / w, 0, "missing word subdirectory");
      words.push_back(w);
    }
  } else {
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.is_directory()) words.push_back(entry.path().filename().string());
    std::sort(words.begin(), words.end());
    if (words.empty()) throw file_error(ErrorKind::io, root, 0, "missing word subdirectories");
    if (options.require_full_benchmark) {
      for (auto w : kBenchmarkWords)
        if (!std::binary_search(words.begin(), words.end(), std::string(w)))
          throw file_error(ErrorKind::io, root / w, 0, "missing word subdirectory");
    }
  }

  Dataset ds;
  for (const auto& w : words) {
    std::string key = to_lower(w);
    if (ds.words.count(key)) throw Error(ErrorKind::usage, "word '" + key + "' requested twice");
    ds.words.emplace(key, load_word(root / w, key));
  }
  return ds;
}

// Writes the dataset back in the same layout. Labels are written; descriptors
// are derived data and are not persisted.
inline void write_dataset(const Dataset& ds, const fs::path& root) {
  for (const auto& [word, data] : ds.words) {
    const fs::path dir = root / word;
    fs::create_directories(dir);
    nlohmann::ordered_json classes = nlohmann::ordered_json::object();
    for (const auto& s : data.inventory.senses) classes[std::to_string(s.id)] = s.label;
    std::ofstream(dir / "classes_map.txt") << classes.dump() << "\n";

    for (Split split : {Split::train, Split::test}) {
      std::ofstream dout(dir / (std::string(to_string(split)) + ".data.txt"));
      std::ofstream gout(dir / (std::string(to_string(split)) + ".gold.txt"));
      for (const auto& inst : data.instances(split)) {
        dout << inst.target_index << '\t';
        for (std::size_t i = 0; i < inst.tokens.size(); ++i) dout << (i ? " " : "") << inst.tokens[i];
        dout << '\n';
        gout << inst.gold_sense.value_or(-1) << '\n';
      }
    }
  }
}

// {"<word>": {"<sense_id>": "<descriptor text>"}}
inline std::map<std::string, DescriptorOverrides> load_overrides(const fs::path& file) {
  std::string text = detail::read_file(file);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw file_error(ErrorKind::parse, file, detail::line_of_offset(text, e.byte), "invalid JSON");
  }
  if (!doc.is_object()) throw file_error(ErrorKind::parse, file, 1, "expected a JSON object");
  std::map<std::string, DescriptorOverrides> out;
  for (const auto& [word, senses] : doc.items()) {
    if (!senses.is_object())
      throw file_error(ErrorKind::parse, file, 0, "overrides for '" + word + "' must be an object");
    for (const auto& [key, text_value] : senses.items()) {
      auto id = parse_int<int>(key);
      if (!id || !text_value.is_string())
        throw file_error(ErrorKind::parse, file, 0, "bad override entry '" + word + "." + key + "'");
      out[to_lower(word)][*id] = text_value.get<std::string>();
    }
  }
  return out;
}

// Overrides for words that are not loaded are ignored.
inline void apply_overrides(Dataset& ds, const std::map<std::string, DescriptorOverrides>& overrides) {
  for (const auto& [word, ovr] : overrides) {
    auto it = ds.words.find(word);
    if (it == ds.words.end()) continue;
    it->second.inventory = build_sense_descriptors(it->second.inventory, ovr);
  }
}

// Stable content hash over words, sense labels, instance ids, tokens and
// golds. Descriptors are excluded so override files do not change it.
inline std::string dataset_fingerprint(const Dataset& ds) {
  Fnv1a h;
  for (const auto& [word, data] : ds.words) {
    h.update_field(word);
    for (const auto& s : data.inventory.senses) {
      h.update_field(std::to_string(s.id));
      h.update_field(s.label);
    }
    for (Split split : {Split::train, Split::test}) {
      for (const auto& inst : data.instances(split)) {
        h.update_field(inst.id);
        h.update_field(std::to_string(inst.target_index));
        for (const auto& t : inst.tokens) h.update_field(t);
        h.update_field(std::to_string(inst.gold_sense.value_or(-1)));
      }
    }
  }
  return h.hex();
}

}  // namespace uwsd
