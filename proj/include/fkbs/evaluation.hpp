#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fkbs {

/// Square count matrix; rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  /// Labels must be unique and non-empty (config error otherwise).
  explicit ConfusionMatrix(std::vector<std::string> labels);
  /// The six emotion classes in canonical order.
  static ConfusionMatrix emotions();

  /// Increments exactly one cell. Throws an unknown-label error.
  void accumulate(std::string_view truth, std::string_view predicted);
  /// Adds another matrix over the same label order.
  void merge(const ConfusionMatrix& other);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::uint64_t count(std::size_t truth, std::size_t predicted) const;
  std::uint64_t row_total(std::size_t truth) const;
  std::uint64_t total() const;
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> counts_;
};

struct AccuracyReport {
  std::string title;
  std::vector<std::string> labels;
  // Row percentages, full precision.
  std::vector<std::vector<double>> percentages;
  std::vector<double> per_class;
  // Unweighted mean of the per-class (diagonal) accuracies.
  double overall = 0.0;
  // Correct predictions over all samples; only for count-based reports.
  std::optional<double> micro_accuracy;
  // Overall figure printed alongside a source table, when known.
  std::optional<double> stated_overall;
  std::vector<std::string> notes;
};

/// Row-normalizes counts to percentages. Throws an empty-row error naming the
/// class when a truth label has no samples.
AccuracyReport report(const ConfusionMatrix& cm);

/// A table given directly as row percentages.
struct PercentageTable {
  std::string title;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::optional<double> stated_overall;
};

/// Tab-separated: `#` comment lines (`# title:` and `# stated_overall:` are
/// read as metadata), a header row of column labels, then one row per class.
PercentageTable parse_percentage_table(std::string_view text);
PercentageTable load_percentage_table(const std::filesystem::path& path);

/// Uses the table's entries as they stand (no renormalization); rows that do
/// not sum to 100 and a mismatching stated overall figure become notes.
AccuracyReport report_from_percentages(const PercentageTable& table);

/// Fixed-width table, one decimal place, rows and columns in label order,
/// followed by the overall figures and notes.
std::string render_table(const AccuracyReport& rep);

/// "anger" -> "Ang." and so on; other labels are returned unchanged.
std::string short_label(std::string_view label);

/// Maps "Ang.", "Surpr", "happiness" ... to the canonical emotion label.
std::optional<std::string> canonical_emotion_label(std::string_view text);

}  // namespace fkbs
