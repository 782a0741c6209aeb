#pragma once

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "specpath/errors.hpp"
#include "specpath/model.hpp"

namespace specpath {

struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd target;
  std::vector<std::string> feature_names;
  std::string target_name;

  Eigen::Index n_rows() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }
};

struct LoadedCsv {
  Dataset dataset;
  std::size_t rows_dropped = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// SplitMix64: the fixed generator behind dataset splitting, pinned so splits
// are bit-identical across platforms and implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform draw from [0, bound) by the multiply-shift trick (no rejection).
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

// 60:20:20 split of 0..n-1: Fisher-Yates shuffle driven by SplitMix64, then
// the first floor(0.6n) indices train, the next floor(0.2n) validate, and
// the remainder tests.
inline SplitIndices split_indices(std::size_t n, std::uint64_t seed) {
  if (n < 5)
    throw DataError("split: need at least 5 rows to form three splits, got " +
                    std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i + 1));
    std::swap(order[i], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(0.6 * static_cast<double>(n));
  const auto n_val = static_cast<std::size_t>(0.2 * static_cast<double>(n));
  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x,
                                 const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

inline Eigen::VectorXd take_rows(const Eigen::VectorXd& y,
                                 const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
  return out;
}

inline double r2(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size()) throw ConfigError("r2: length mismatch");
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  if (ss_tot <= 0.0) throw DataError("r2: zero-variance target");
  return 1.0 - (y - yhat).squaredNorm() / ss_tot;
}

// RMSE divided by the population standard deviation of the true targets.
inline double nrmse_sigma(const Eigen::VectorXd& y,
                          const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size()) throw ConfigError("nrmse: length mismatch");
  const double n = static_cast<double>(y.size());
  const double mean = y.mean();
  const double variance = (y.array() - mean).square().sum() / n;
  if (variance <= 0.0) throw DataError("nrmse: zero-variance target");
  const double mse = (y - yhat).squaredNorm() / n;
  return std::sqrt(mse / variance);
}

namespace detail {

// RFC 4180 record reader: handles quoted fields, doubled quotes, embedded
// separators and newlines, and both LF and CRLF endings. Returns false at
// end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string field;
  bool quoted = false;
  while (true) {
    if (c == EOF) {
      fields.push_back(std::move(field));
      return true;
    }
    if (quoted) {
      if (c == '"') {
        const int peek = in.peek();
        if (peek == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += static_cast<char>(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    } else {
      field += static_cast<char>(c);
    }
    c = in.get();
  }
}

inline bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && begin != end;
}

inline bool is_missing_token(const std::string& text) {
  std::string t;
  for (char c : text) {
    if (c != ' ' && c != '\t') t += static_cast<char>(std::tolower(c));
  }
  return t.empty() || t == "nan" || t == "na";
}

// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double value) {
  char buf[40];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

}  // namespace detail

namespace detail {

// Shared CSV body: target_column empty means "all columns are features".
inline LoadedCsv load_csv_impl(const std::string& path,
                               const std::string& target_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_csv: cannot open '" + path + "'");

  std::vector<std::string> header;
  if (!detail::read_csv_record(in, header) || header.empty())
    throw DataError("load_csv: '" + path + "' has no header row");
  if (header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    header[0].erase(0, 3);  // UTF-8 byte order mark

  std::ptrdiff_t target_index = -1;
  if (!target_column.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == target_column)
        target_index = static_cast<std::ptrdiff_t>(i);
    }
    if (target_index < 0) {
      std::string available;
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) available += ", ";
        available += header[i];
      }
      throw DataError("load_csv: target column '" + target_column +
                      "' not found; available columns: " + available);
    }
  }

  LoadedCsv out;
  Dataset& data = out.dataset;
  data.target_name = target_column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (static_cast<std::ptrdiff_t>(i) != target_index)
      data.feature_names.push_back(header[i]);
  }

  std::vector<double> feature_values;
  std::vector<double> target_values;
  std::vector<std::string> fields;
  std::vector<double> row(header.size());
  std::size_t line = 1;
  while (detail::read_csv_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size())
      throw DataError("load_csv: line " + std::to_string(line) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    bool drop = false;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (detail::is_missing_token(fields[i])) {
        drop = true;
        break;
      }
      double value = 0.0;
      if (!detail::parse_double(fields[i], value))
        throw DataError("load_csv: line " + std::to_string(line) +
                        ", column '" + header[i] + "': cannot parse '" +
                        fields[i] + "' as a number");
      if (!std::isfinite(value)) {
        drop = true;
        break;
      }
      row[i] = value;
    }
    if (drop) {
      ++out.rows_dropped;
      continue;
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == target_index)
        target_values.push_back(row[i]);
      else
        feature_values.push_back(row[i]);
    }
  }

  const std::size_t d = data.feature_names.size();
  const std::size_t n = d == 0 ? target_values.size() : feature_values.size() / d;
  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          feature_values[i * d + j];
  }
  if (target_index >= 0) {
    data.target.resize(static_cast<Eigen::Index>(target_values.size()));
    for (std::size_t i = 0; i < target_values.size(); ++i)
      data.target[static_cast<Eigen::Index>(i)] = target_values[i];
  }
  return out;
}

}  // namespace detail

// Parses a headered CSV into features + target. Rows with missing or
// non-finite cells are dropped (counted in the result); any other
// non-numeric cell is an error naming the line.
inline LoadedCsv load_csv(const std::string& path,
                          const std::string& target_column) {
  if (target_column.empty())
    throw ConfigError("load_csv: target column name is empty");
  return detail::load_csv_impl(path, target_column);
}

// Same parsing, but every column is a feature (prediction input).
inline LoadedCsv load_csv_features(const std::string& path) {
  return detail::load_csv_impl(path, "");
}

// Writes a single-column CSV (used for prediction output).
inline void write_column_csv(const std::string& path, const std::string& name,
                             const Eigen::VectorXd& values) {
  std::ofstream outstream(path, std::ios::binary);
  if (!outstream) throw DataError("cannot open '" + path + "' for writing");
  outstream << name << "\n";
  for (Eigen::Index i = 0; i < values.size(); ++i)
    outstream << detail::format_double(values[i]) << "\n";
}

// Canonical CSV form of a dataset: feature columns then the target, numbers
// in shortest round-trip notation, LF line endings.
inline void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  const bool has_target = data.target.size() > 0;
  for (std::size_t j = 0; j < data.feature_names.size(); ++j) {
    if (j) out << ",";
    out << data.feature_names[j];
  }
  if (has_target) out << "," << data.target_name;
  out << "\n";
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    for (Eigen::Index j = 0; j < data.n_features(); ++j) {
      if (j) out << ",";
      out << detail::format_double(data.features(i, j));
    }
    if (has_target) out << "," << detail::format_double(data.target[i]);
    out << "\n";
  }
}

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json path_to_json(const FrequencyVector& m) {
  return nlohmann::json{{"support", m.support}, {"coeffs", m.coeffs}};
}

inline FrequencyVector path_from_json(const nlohmann::json& j, int dimension) {
  FrequencyVector m;
  m.support = j.at("support").get<std::vector<int>>();
  m.coeffs = j.at("coeffs").get<std::vector<int>>();
  m.dimension = dimension;
  validate_path(m);
  return m;
}

inline nlohmann::json model_to_json(const SpectralModel& model) {
  if (!model.is_fitted()) throw StateError("save_model: model is not fitted");
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["d"] = model.dimension();
  j["centers"] = model.scaling.centers;
  j["scales"] = model.scaling.scales;
  j["target_mean"] = model.scaling.target_mean;
  j["lambda_star"] = model.lambda_star;
  j["intercept"] = model.intercept;
  j["paths"] = nlohmann::json::array();
  for (const auto& m : model.paths) j["paths"].push_back(path_to_json(m));
  j["amplitudes"] = std::vector<double>(
      model.amplitudes.data(), model.amplitudes.data() + model.amplitudes.size());
  j["fit_trace"] = nlohmann::json::array();
  for (const auto& entry : model.fit_trace) {
    nlohmann::json t;
    t["iteration"] = entry.iteration;
    t["accepted"] = entry.accepted;
    t["k"] = entry.support_size;
    t["block_size"] = entry.block_size;
    t["added"] = nlohmann::json::array();
    for (const auto& m : entry.added) t["added"].push_back(path_to_json(m));
    t["n_paths"] = entry.n_paths;
    t["train_r2"] = entry.train_r2;
    t["val_r2"] = entry.val_r2;
    t["lambda"] = entry.lambda;
    j["fit_trace"].push_back(std::move(t));
  }
  return j;
}

inline SpectralModel model_from_json(const nlohmann::json& j) {
  SpectralModel model;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("load_model: unsupported format_version " +
                      std::to_string(version));
    const int d = j.at("d").get<int>();
    model.scaling.centers = j.at("centers").get<std::vector<double>>();
    model.scaling.scales = j.at("scales").get<std::vector<double>>();
    model.scaling.target_mean = j.at("target_mean").get<double>();
    model.lambda_star = j.at("lambda_star").get<double>();
    model.intercept = j.at("intercept").get<double>();
    if (model.scaling.centers.size() != static_cast<std::size_t>(d) ||
        model.scaling.scales.size() != static_cast<std::size_t>(d))
      throw DataError("load_model: scaling parameter lengths do not match d");
    for (double s : model.scaling.scales) {
      if (!(s > 0.0)) throw DataError("load_model: non-positive scale");
    }
    for (const auto& pj : j.at("paths"))
      model.paths.push_back(path_from_json(pj, d));
    const auto amps = j.at("amplitudes").get<std::vector<double>>();
    if (amps.size() != model.paths.size())
      throw DataError("load_model: amplitude/path count mismatch");
    model.amplitudes = Eigen::Map<const Eigen::VectorXd>(
        amps.data(), static_cast<Eigen::Index>(amps.size()));
    for (const auto& tj : j.at("fit_trace")) {
      TraceEntry entry;
      entry.iteration = tj.at("iteration").get<int>();
      entry.accepted = tj.at("accepted").get<bool>();
      entry.support_size = tj.at("k").get<int>();
      entry.block_size = tj.at("block_size").get<int>();
      for (const auto& pj : tj.at("added"))
        entry.added.push_back(path_from_json(pj, d));
      entry.n_paths = tj.at("n_paths").get<std::size_t>();
      entry.train_r2 = tj.at("train_r2").get<double>();
      entry.val_r2 = tj.at("val_r2").get<double>();
      entry.lambda = tj.at("lambda").get<double>();
      model.fit_trace.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("load_model: malformed model file: ") + e.what());
  }
  return model;
}

inline void save_model(const SpectralModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_model: cannot open '" + path + "'");
  out << model_to_json(model).dump(2) << "\n";
}

inline SpectralModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_model: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_model: '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace specpath
