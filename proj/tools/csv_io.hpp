// CSV ingestion and emission for survival datasets. Input schema: a
// header with `time` (positive decimal), `status` (0/1) and covariate
// columns x1..xp, plus an optional `id` column that is carried through
// but ignored by the estimators. No quoting, no missing values.
#pragma once

#include <stdexcept>
#include <string>

#include "lmfrail/survival_data.hpp"

namespace lmfrail::io {

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& msg, int row, std::string column)
      : std::runtime_error("row " + std::to_string(row) +
                           (column.empty() ? "" : ", column " + column) +
                           ": " + msg),
        row_(row),
        column_(std::move(column)) {}
  int row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  int row_;
  std::string column_;
};

SurvivalDataset read_dataset_csv(const std::string& path);

// Full-precision emission (17 significant digits), so written datasets
// re-read bit-identically.
void write_dataset_csv(const std::string& path, const SurvivalDataset& data);

std::string format_full(double v);

}  // namespace lmfrail::io
