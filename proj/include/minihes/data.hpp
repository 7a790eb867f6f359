#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "minihes/rng.hpp"

namespace minihes {

struct RatingTriple {
  int user_id = 0;
  int item_id = 0;
  double rating = 0.0;

  bool operator==(const RatingTriple&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Sparse rating data with both adjacency views. Immutable after
// construction; concurrent reads are safe.
struct HdiDataset {
  int num_users = 0;
  int num_items = 0;
  std::vector<RatingTriple> entries;
  // by_user[u] = sorted (item_id, rating); by_item[i] = sorted (user_id, rating)
  std::vector<std::vector<std::pair<int, double>>> by_user;
  std::vector<std::vector<std::pair<int, double>>> by_item;
  // external token <-> dense index, first-appearance order
  std::vector<std::string> user_tokens;
  std::vector<std::string> item_tokens;
  std::unordered_map<std::string, int> user_index;
  std::unordered_map<std::string, int> item_index;

  double density() const {
    if (num_users == 0 || num_items == 0) return 0.0;
    return static_cast<double>(entries.size()) /
           (static_cast<double>(num_users) * num_items);
  }
};

namespace detail {

inline void build_adjacency(HdiDataset& d) {
  d.by_user.assign(d.num_users, {});
  d.by_item.assign(d.num_items, {});
  for (const auto& e : d.entries) {
    d.by_user[e.user_id].emplace_back(e.item_id, e.rating);
    d.by_item[e.item_id].emplace_back(e.user_id, e.rating);
  }
  for (auto& adj : d.by_user) std::sort(adj.begin(), adj.end());
  for (auto& adj : d.by_item) std::sort(adj.begin(), adj.end());
}

inline std::vector<std::string_view> tokenize(std::string_view line,
                                              std::string_view delim) {
  std::vector<std::string_view> out;
  if (delim.empty() || delim == " " || delim == "\t") {
    // runs of whitespace
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
  } else {
    std::size_t pos = 0;
    while (true) {
      std::size_t next = line.find(delim, pos);
      if (next == std::string_view::npos) {
        out.push_back(line.substr(pos));
        break;
      }
      out.push_back(line.substr(pos, next - pos));
      pos = next + delim.size();
    }
  }
  return out;
}

}  // namespace detail

// Delimiter "" is auto: "::" if present in the line, otherwise any run of
// commas/whitespace. Lines starting with '#' are comments. Extra fields
// (timestamps) are ignored; duplicate (u,i) pairs keep the last rating.
inline HdiDataset parse_ratings(std::istream& in, std::string delimiter = "") {
  HdiDataset d;
  std::unordered_map<std::uint64_t, std::size_t> seen;  // (u,i) -> entry idx
  std::string line;
  std::size_t lineno = 0;
  std::size_t parsed = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    std::size_t first = sv.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    if (sv[first] == '#') continue;

    std::string_view delim = delimiter;
    std::string comma_normalized;
    if (delimiter.empty()) {
      if (sv.find("::") != std::string_view::npos) {
        delim = "::";
      } else {
        comma_normalized = line;
        std::replace(comma_normalized.begin(), comma_normalized.end(), ',', ' ');
        sv = comma_normalized;
        delim = "";
      }
    }
    auto tokens = detail::tokenize(sv, delim);
    if (tokens.size() < 3)
      throw ParseError(lineno, "expected at least 3 fields, got " +
                                   std::to_string(tokens.size()));
    std::string utok(tokens[0]);
    std::string itok(tokens[1]);
    std::string rtok(tokens[2]);
    if (utok.empty() || itok.empty())
      throw ParseError(lineno, "empty id token");
    double rating;
    try {
      std::size_t consumed = 0;
      rating = std::stod(rtok, &consumed);
      if (consumed != rtok.size()) throw std::invalid_argument(rtok);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad rating '" + rtok + "'");
    }
    if (!std::isfinite(rating))
      throw ParseError(lineno, "non-finite rating '" + rtok + "'");

    auto [uit, uinserted] = d.user_index.try_emplace(utok, d.num_users);
    if (uinserted) {
      d.user_tokens.push_back(utok);
      ++d.num_users;
    }
    auto [iit, iinserted] = d.item_index.try_emplace(itok, d.num_items);
    if (iinserted) {
      d.item_tokens.push_back(itok);
      ++d.num_items;
    }
    int u = uit->second;
    int i = iit->second;
    std::uint64_t key =
        (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(i);
    auto [sit, fresh] = seen.try_emplace(key, d.entries.size());
    if (fresh) {
      d.entries.push_back({u, i, rating});
    } else {
      d.entries[sit->second].rating = rating;  // last wins
    }
    ++parsed;
  }
  if (parsed == 0) throw ParseError(lineno, "no rating entries in input");
  detail::build_adjacency(d);
  return d;
}

// Canonical serialization: user<TAB>item<TAB>rating, entry order, external
// tokens, ratings printed with round-trip precision.
inline void serialize_ratings(const HdiDataset& d, std::ostream& out) {
  char buf[64];
  for (const auto& e : d.entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.rating);
    out << d.user_tokens[e.user_id] << '\t' << d.item_tokens[e.item_id] << '\t'
        << buf << '\n';
  }
}

// Builds a dataset from already dense-indexed triples (synthetic data,
// splits). Tokens default to decimal indices.
inline HdiDataset dataset_from_triples(int num_users, int num_items,
                                       std::vector<RatingTriple> entries) {
  HdiDataset d;
  d.num_users = num_users;
  d.num_items = num_items;
  d.entries = std::move(entries);
  for (const auto& e : d.entries) {
    if (e.user_id < 0 || e.user_id >= num_users || e.item_id < 0 ||
        e.item_id >= num_items)
      throw std::out_of_range("entry index outside entity universe");
  }
  d.user_tokens.reserve(num_users);
  for (int u = 0; u < num_users; ++u) {
    d.user_tokens.push_back(std::to_string(u));
    d.user_index.emplace(d.user_tokens.back(), u);
  }
  d.item_tokens.reserve(num_items);
  for (int i = 0; i < num_items; ++i) {
    d.item_tokens.push_back(std::to_string(i));
    d.item_index.emplace(d.item_tokens.back(), i);
  }
  detail::build_adjacency(d);
  return d;
}

struct SplitResult {
  HdiDataset train;
  HdiDataset validation;
  HdiDataset test;
};

// Seeded global-random split. Parts keep the full dataset's entity universe
// and ID maps so cold entities can still be scored.
inline SplitResult split_dataset(const HdiDataset& data,
                                 std::array<double, 3> ratios,
                                 std::uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  for (double r : ratios)
    if (!(r > 0.0)) throw std::invalid_argument("split ratios must be positive");
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");
  const std::size_t n = data.entries.size();
  if (n < 3) throw std::invalid_argument("need at least 3 entries to split");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(seed, "dataset-split");
  std::shuffle(idx.begin(), idx.end(), rng);

  std::array<std::size_t, 3> sizes{};
  sizes[0] = static_cast<std::size_t>(std::floor(n * ratios[0]));
  sizes[1] = static_cast<std::size_t>(std::floor(n * ratios[1]));
  sizes[2] = n - sizes[0] - sizes[1];
  // all parts non-empty for n >= 3: steal from the largest
  for (auto& s : sizes) {
    while (s == 0) {
      auto big = std::max_element(sizes.begin(), sizes.end());
      --*big;
      ++s;
    }
  }

  SplitResult out;
  HdiDataset* parts[3] = {&out.train, &out.validation, &out.test};
  std::size_t cursor = 0;
  for (int p = 0; p < 3; ++p) {
    std::vector<std::size_t> chosen(idx.begin() + cursor,
                                    idx.begin() + cursor + sizes[p]);
    cursor += sizes[p];
    std::sort(chosen.begin(), chosen.end());  // keep source entry order
    std::vector<RatingTriple> triples;
    triples.reserve(chosen.size());
    for (std::size_t k : chosen) triples.push_back(data.entries[k]);
    HdiDataset& part = *parts[p];
    part.num_users = data.num_users;
    part.num_items = data.num_items;
    part.entries = std::move(triples);
    part.user_tokens = data.user_tokens;
    part.item_tokens = data.item_tokens;
    part.user_index = data.user_index;
    part.item_index = data.item_index;
    detail::build_adjacency(part);
  }
  return out;
}

}  // namespace minihes
