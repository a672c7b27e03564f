#include "csv_io.hpp"

#include <algorithm>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace lmfrail::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, int row, const std::string& col) {
  if (tok.empty()) throw CsvError("missing value", row, col);
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + tok.size()) {
    throw CsvError("not a number: '" + tok + "'", row, col);
  }
  return v;
}

}  // namespace

SurvivalDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw CsvError("cannot open file '" + path + "'", 0, "");
  }
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw CsvError("no records (empty file)", 0, "");
  }

  const std::vector<std::string> header = split_line(line);
  int time_col = -1, status_col = -1, id_col = -1;
  std::vector<std::pair<int, int>> covariate_cols;  // (x index, column)
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& name = header[c];
    if (name == "time") {
      time_col = c;
    } else if (name == "status") {
      status_col = c;
    } else if (name == "id") {
      id_col = c;
    } else if (name.size() > 1 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      covariate_cols.emplace_back(std::stoi(name.substr(1)), c);
    } else {
      throw CsvError("unknown column '" + name + "'", 1, name);
    }
  }
  (void)id_col;
  if (time_col < 0) throw CsvError("missing required column", 1, "time");
  if (status_col < 0) throw CsvError("missing required column", 1, "status");
  std::sort(covariate_cols.begin(), covariate_cols.end());
  const int p = static_cast<int>(covariate_cols.size());
  for (int k = 0; k < p; ++k) {
    if (covariate_cols[k].first != k + 1) {
      throw CsvError("covariate columns must be x1..xp without gaps", 1,
                     "x" + std::to_string(covariate_cols[k].first));
    }
  }

  std::vector<SurvivalRecord> records;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> toks = split_line(line);
    if (toks.size() != header.size()) {
      throw CsvError("expected " + std::to_string(header.size()) +
                         " fields, found " + std::to_string(toks.size()),
                     row, "");
    }
    SurvivalRecord rec;
    rec.time = parse_double(toks[time_col], row, "time");
    if (!(rec.time > 0.0)) {
      throw CsvError("time must be positive", row, "time");
    }
    const double st = parse_double(toks[status_col], row, "status");
    if (st != 0.0 && st != 1.0) {
      throw CsvError("status must be 0 or 1", row, "status");
    }
    rec.status = static_cast<int>(st);
    rec.covariates.resize(p);
    for (int k = 0; k < p; ++k) {
      rec.covariates[k] = parse_double(toks[covariate_cols[k].second], row,
                                       header[covariate_cols[k].second]);
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw CsvError("no records", row, "");
  }
  return SurvivalDataset(std::move(records));
}

void write_dataset_csv(const std::string& path, const SurvivalDataset& data) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write file '" + path + "'", 0, "");
  out << "time,status";
  for (int k = 1; k <= data.covariate_dim(); ++k) out << ",x" << k;
  out << "\n";
  for (const auto& rec : data) {
    out << format_full(rec.time) << "," << rec.status;
    for (int k = 0; k < data.covariate_dim(); ++k) {
      out << "," << format_full(rec.covariates[k]);
    }
    out << "\n";
  }
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace lmfrail::io
