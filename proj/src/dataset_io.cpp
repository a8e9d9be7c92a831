#include "sparsecv/dataset_io.hpp"

#include "sparsecv/error.hpp"
#include "sparsecv/exact_cv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <vector>

namespace sparsecv {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_index(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorKind::kIoError, "number formatting failed");
  return std::string(buf, ptr);
}

// Maps {0, 1} labels to {-1, +1} and rejects anything else.
Vector normalize_labels(const Vector& y, Family family, const std::vector<std::size_t>& lines) {
  if (family == Family::kLinear) return y;
  bool has_zero = false;
  bool has_minus = false;
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      has_zero = true;
    } else if (y[i] == -1.0) {
      has_minus = true;
    } else if (y[i] != 1.0) {
      throw Error(ErrorKind::kLabelDomain, "line " + std::to_string(lines[i]) + ": label " +
                                               format_double(y[i]) +
                                               " is not in {0, 1} or {-1, +1}");
    }
  }
  if (has_zero && has_minus) {
    throw Error(ErrorKind::kLabelDomain, "labels mix 0 and -1");
  }
  Vector out = y;
  if (has_zero) {
    for (Index i = 0; i < out.size(); ++i) out[i] = out[i] == 0.0 ? -1.0 : 1.0;
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path + " for writing");
  return out;
}

}  // namespace

std::string to_string(DataFormat format) {
  return format == DataFormat::kLibsvm ? "libsvm" : "csv";
}

DataFormat data_format_from_string(const std::string& name) {
  if (name == "libsvm") return DataFormat::kLibsvm;
  if (name == "csv") return DataFormat::kCsv;
  throw Error(ErrorKind::kInvalidArgument, "unknown format: " + name);
}

Dataset parse_libsvm(std::istream& in, Family family, Index min_cols) {
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> labels;
  std::vector<std::size_t> label_lines;
  long long max_col = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = line;
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    rest = trim(rest);
    if (rest.empty()) continue;
    const Index row = static_cast<Index>(labels.size());
    std::size_t pos = 0;
    bool first = true;
    while (pos < rest.size()) {
      const auto end = std::min(rest.find_first_of(" \t", pos), rest.size());
      const std::string_view tok = rest.substr(pos, end - pos);
      pos = rest.find_first_not_of(" \t", end);
      if (pos == std::string_view::npos) pos = rest.size();
      if (first) {
        double label = 0.0;
        if (!parse_double(tok, label)) parse_fail(line_no, "bad label '" + std::string(tok) + "'");
        labels.push_back(label);
        label_lines.push_back(line_no);
        first = false;
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        parse_fail(line_no, "expected idx:value, got '" + std::string(tok) + "'");
      }
      if (tok.substr(0, colon) == "qid") continue;
      long long idx = 0;
      double value = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx < 1) {
        parse_fail(line_no, "bad feature index '" + std::string(tok.substr(0, colon)) + "'");
      }
      if (!parse_double(tok.substr(colon + 1), value)) {
        parse_fail(line_no, "bad feature value '" + std::string(tok.substr(colon + 1)) + "'");
      }
      max_col = std::max(max_col, idx);
      if (value != 0.0) triplets.emplace_back(row, static_cast<Index>(idx - 1), value);
    }
  }
  if (labels.empty()) parse_fail(line_no == 0 ? 1 : line_no, "no data rows");
  const Index cols = std::max<Index>({static_cast<Index>(max_col), min_cols, 1});
  SparseMatrix x(static_cast<Index>(labels.size()), cols);
  x.setFromTriplets(triplets.begin(), triplets.end());
  x.makeCompressed();
  const Vector y = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  return Dataset(Design::automatic(std::move(x)), normalize_labels(y, family, label_lines),
                 family);
}

Dataset parse_csv(std::istream& in, Family family) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) parse_fail(1, "missing header row");
  width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (width < 2) parse_fail(line_no, "need at least one feature column and a response");

  std::vector<double> values;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    std::size_t fields = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = body.find(',', pos);
      const std::string_view tok =
          trim(body.substr(pos, comma == std::string_view::npos ? body.size() - pos : comma - pos));
      double v = 0.0;
      if (!parse_double(tok, v)) parse_fail(line_no, "bad number '" + std::string(tok) + "'");
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields != width) {
      parse_fail(line_no, "expected " + std::to_string(width) + " fields, got " +
                              std::to_string(fields));
    }
    lines.push_back(line_no);
  }
  if (lines.empty()) parse_fail(line_no, "no data rows");
  const Index n = static_cast<Index>(lines.size());
  const Index d = static_cast<Index>(width) - 1;
  Matrix x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = values[static_cast<std::size_t>(i * (d + 1) + j)];
    y[i] = values[static_cast<std::size_t>(i * (d + 1) + d)];
  }
  return Dataset(Design(std::move(x)), normalize_labels(y, family, lines), family);
}

Dataset load_dataset(const std::string& path, DataFormat format, Family family,
                     Index min_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return format == DataFormat::kLibsvm ? parse_libsvm(in, family, min_cols)
                                       : parse_csv(in, family);
}

void write_libsvm(const Dataset& data, const std::string& path) {
  std::ofstream out = open_out(path);
  const SparseMatrix x = data.x().is_sparse() ? data.x().sparse()
                                              : SparseMatrix(data.x().dense().sparseView(0.0, 0.0));
  const Eigen::SparseMatrix<double, Eigen::RowMajor> rows(x);
  for (Index i = 0; i < rows.outerSize(); ++i) {
    out << format_double(data.y()[i]);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i); it; ++it) {
      out << ' ' << (it.col() + 1) << ':' << format_double(it.value());
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path);
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out = open_out(path);
  for (Index j = 0; j < data.d(); ++j) out << 'x' << j << ',';
  out << "y\n";
  const Matrix x = data.x().to_dense();
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.d(); ++j) out << format_double(x(i, j)) << ',';
    out << format_double(data.y()[i]) << '\n';
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path);
}

Dataset preprocess_rcv1(const std::string& in_path, const std::string& out_path, Index n_docs,
                        Index n_features, std::uint64_t seed) {
  const Dataset full = load_dataset(in_path, DataFormat::kLibsvm, Family::kLogistic);
  const SparseMatrix x = full.x().is_sparse() ? full.x().sparse()
                                              : SparseMatrix(full.x().dense().sparseView());
  std::vector<Index> order(static_cast<std::size_t>(x.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<Index> counts(order.size());
  for (Index j = 0; j < x.cols(); ++j) {
    counts[j] = x.outerIndexPtr()[j + 1] - x.outerIndexPtr()[j];
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return counts[a] > counts[b]; });
  order.resize(static_cast<std::size_t>(std::min<Index>(n_features, x.cols())));
  std::sort(order.begin(), order.end());

  const std::vector<Index> docs =
      sample_without_replacement(full.n(), std::min(n_docs, full.n()), seed);
  const Dataset subset = full.select_rows(docs).select_columns(order);
  write_libsvm(subset, out_path);
  return subset;
}

}  // namespace sparsecv
