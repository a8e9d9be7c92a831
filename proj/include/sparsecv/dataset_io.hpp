#pragma once

#include "sparsecv/glm.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace sparsecv {

enum class DataFormat { kLibsvm, kCsv };

std::string to_string(DataFormat format);
DataFormat data_format_from_string(const std::string& name);

/// LIBSVM lines "label idx:val ..." with 1-based indices, or CSV with a header
/// row and the response in the last column. For logistic data, labels in
/// {0, 1} or {-1, +1} become {-1, +1}; anything else is a label-domain error.
/// `min_cols` widens a LIBSVM design whose trailing columns are all zero.
Dataset load_dataset(const std::string& path, DataFormat format, Family family,
                     Index min_cols = 0);

Dataset parse_libsvm(std::istream& in, Family family, Index min_cols = 0);
Dataset parse_csv(std::istream& in, Family family);

/// Writers use shortest round-trip number formatting.
void write_libsvm(const Dataset& data, const std::string& path);
void write_csv(const Dataset& data, const std::string& path);

/// Keeps the `n_features` columns with the most nonzeros (ties to the lower
/// index) and `n_docs` rows sampled with `seed`, then writes LIBSVM output.
/// Returns the subset that was written.
Dataset preprocess_rcv1(const std::string& in_path, const std::string& out_path,
                        Index n_docs = 5000, Index n_features = 10000,
                        std::uint64_t seed = 0);

}  // namespace sparsecv
