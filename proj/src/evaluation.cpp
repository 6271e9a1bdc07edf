#include "fkbs/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fkbs/error.hpp"
#include "fkbs/fuzzy.hpp"

namespace fkbs {

namespace {

constexpr double kRowSumTolerance = 0.2;
constexpr double kStatedOverallTolerance = 0.05;

std::string one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(trim(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void add_row_sum_notes(AccuracyReport& rep) {
  for (std::size_t r = 0; r < rep.percentages.size(); ++r) {
    const double sum = std::accumulate(rep.percentages[r].begin(), rep.percentages[r].end(), 0.0);
    if (std::abs(sum - 100.0) > kRowSumTolerance) {
      rep.notes.push_back("row '" + rep.labels[r] + "' sums to " + one_decimal(sum) + "%, not 100%");
    }
  }
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string_view> seen;
  for (const auto& l : labels_) {
    if (l.empty() || !seen.insert(l).second) {
      throw Error(ErrorKind::kConfig, "confusion matrix labels must be unique and non-empty");
    }
  }
  if (labels_.empty()) throw Error(ErrorKind::kConfig, "confusion matrix needs at least one label");
  counts_.assign(labels_.size() * labels_.size(), 0);
}

ConfusionMatrix ConfusionMatrix::emotions() {
  return ConfusionMatrix(std::vector<std::string>(kEmotionNames.begin(), kEmotionNames.end()));
}

std::optional<std::size_t> ConfusionMatrix::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

void ConfusionMatrix::accumulate(std::string_view truth, std::string_view predicted) {
  const auto t = index_of(truth);
  const auto p = index_of(predicted);
  if (!t) throw Error(ErrorKind::kUnknownLabel, "unknown truth label '" + std::string(truth) + "'");
  if (!p) throw Error(ErrorKind::kUnknownLabel, "unknown predicted label '" + std::string(predicted) + "'");
  ++counts_[*t * labels_.size() + *p];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.labels_ != labels_) throw Error(ErrorKind::kConfig, "cannot merge matrices with different labels");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::count(std::size_t truth, std::size_t predicted) const {
  return counts_.at(truth * labels_.size() + predicted);
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::uint64_t sum = 0;
  for (std::size_t p = 0; p < labels_.size(); ++p) sum += count(truth, p);
  return sum;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

AccuracyReport report(const ConfusionMatrix& cm) {
  AccuracyReport rep;
  rep.labels = cm.labels();
  std::uint64_t correct = 0;
  for (std::size_t t = 0; t < cm.size(); ++t) {
    const std::uint64_t row = cm.row_total(t);
    if (row == 0) throw Error(ErrorKind::kEmptyRow, "no samples with true class '" + cm.labels()[t] + "'");
    std::vector<double> pct(cm.size());
    for (std::size_t p = 0; p < cm.size(); ++p) {
      pct[p] = 100.0 * static_cast<double>(cm.count(t, p)) / static_cast<double>(row);
    }
    rep.per_class.push_back(pct[t]);
    rep.percentages.push_back(std::move(pct));
    correct += cm.count(t, t);
  }
  rep.overall = mean(rep.per_class);
  rep.micro_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(cm.total());
  return rep;
}

PercentageTable parse_percentage_table(std::string_view text) {
  PercentageTable table;
  std::vector<std::string> column_labels;
  std::vector<Diagnostic> diags;
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (trimmed[0] == '#') {
      const std::string body = trim(std::string_view(trimmed).substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(std::string_view(body).substr(0, colon));
      const std::string value = trim(std::string_view(body).substr(colon + 1));
      if (key == "title") table.title = value;
      if (key == "stated_overall") {
        double v = 0.0;
        auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc{}) {
          diags.push_back({ErrorKind::kSchema, line_no, 0, "stated_overall is not a number"});
        } else {
          table.stated_overall = v;
        }
      }
      continue;
    }
    auto cells = split_tabs(line);
    if (column_labels.empty()) {
      // Header: an empty corner cell, then one label per column.
      if (!cells.empty() && cells.front().empty()) cells.erase(cells.begin());
      for (const auto& c : cells) {
        auto label = canonical_emotion_label(c);
        column_labels.push_back(label ? *label : c);
      }
      continue;
    }
    if (cells.size() != column_labels.size() + 1) {
      diags.push_back({ErrorKind::kSchema, line_no, 0,
                       "expected " + std::to_string(column_labels.size() + 1) + " cells, found " +
                           std::to_string(cells.size())});
      continue;
    }
    auto label = canonical_emotion_label(cells[0]);
    table.labels.push_back(label ? *label : cells[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      double v = 0.0;
      const std::string& c = cells[i];
      auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc{} || res.ptr != c.data() + c.size() || !(v >= 0.0 && v <= 100.0)) {
        diags.push_back({ErrorKind::kSchema, line_no, 0, "cell '" + c + "' is not a percentage"});
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (diags.empty()) {
    if (column_labels.empty() || table.rows.empty()) {
      diags.push_back({ErrorKind::kSchema, 0, 0, "table has no header or no rows"});
    } else if (column_labels != table.labels) {
      diags.push_back({ErrorKind::kSchema, 0, 0, "row labels must match column labels in the same order"});
    }
  }
  if (!diags.empty()) throw Error(std::move(diags));
  return table;
}

PercentageTable load_percentage_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open table '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_percentage_table(buf.str());
}

AccuracyReport report_from_percentages(const PercentageTable& table) {
  AccuracyReport rep;
  rep.title = table.title;
  rep.labels = table.labels;
  rep.percentages = table.rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) rep.per_class.push_back(table.rows[i][i]);
  rep.overall = mean(rep.per_class);
  rep.stated_overall = table.stated_overall;
  add_row_sum_notes(rep);
  if (table.stated_overall && std::abs(*table.stated_overall - rep.overall) > kStatedOverallTolerance) {
    rep.notes.push_back("caveat: the stated overall figure is " + one_decimal(*table.stated_overall) +
                        "%, but the mean of the diagonal is " + one_decimal(rep.overall) +
                        "%; the table entries are reported as given");
  }
  return rep;
}

std::string short_label(std::string_view label) {
  static constexpr std::array<std::string_view, kEmotionCount> kShort = {"Ang.", "Hap.",  "Sad",
                                                                        "Surp.", "Disg.", "Fear"};
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (kEmotionNames[i] == label) return std::string(kShort[i]);
  }
  return std::string(label);
}

std::optional<std::string> canonical_emotion_label(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (c == '.') continue;
    key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (key.size() < 3) return std::nullopt;
  for (auto name : kEmotionNames) {
    if (name.substr(0, key.size()) == key) return std::string(name);
  }
  return std::nullopt;
}

std::string render_table(const AccuracyReport& rep) {
  std::size_t width = 7;
  for (const auto& l : rep.labels) width = std::max(width, short_label(l).size() + 1);
  auto pad = [width](const std::string& s, bool right) {
    if (s.size() >= width) return s;
    const std::string fill(width - s.size(), ' ');
    return right ? fill + s : s + fill;
  };

  std::ostringstream out;
  if (!rep.title.empty()) out << rep.title << '\n';
  out << pad("", false);
  for (const auto& l : rep.labels) out << pad(short_label(l), true);
  out << '\n';
  for (std::size_t r = 0; r < rep.labels.size(); ++r) {
    out << pad(short_label(rep.labels[r]), false);
    for (double v : rep.percentages[r]) out << pad(one_decimal(v), true);
    out << '\n';
  }
  out << "overall (mean of per-class accuracy): " << one_decimal(rep.overall) << "%\n";
  if (rep.micro_accuracy) out << "micro accuracy (correct / all samples): " << one_decimal(*rep.micro_accuracy) << "%\n";
  if (rep.stated_overall) out << "stated overall: " << one_decimal(*rep.stated_overall) << "%\n";
  for (const auto& note : rep.notes) out << "note: " << note << '\n';
  return out.str();
}

}  // namespace fkbs
