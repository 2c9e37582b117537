#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stmmmf/sparse_matrix.hpp"

namespace stmmmf {

struct RawRating {
    std::int64_t user = 0;
    std::int64_t item = 0;
    int rating = 0;
    std::int64_t timestamp = 0;
};

struct RawRatings {
    std::vector<RawRating> triples;
    std::string source;
    int max_rating = 5;
};

enum class DatasetFlavor { ml100k, ml1m, stmat };

DatasetFlavor parse_flavor(const std::string& name);

/// MovieLens 100K `u.data`: user TAB item TAB rating TAB timestamp.
/// Blank lines are skipped; anything else malformed throws parse_error.
RawRatings parse_ml100k(std::istream& in);
/// MovieLens 1M `ratings.dat`: user::item::rating::timestamp.
RawRatings parse_ml1m(std::istream& in);

struct PreprocessResult {
    SparseRatingMatrix matrix;
    std::vector<std::int64_t> user_ids;  // dense index -> external id
    std::vector<std::int64_t> item_ids;
    std::size_t duplicates = 0;      // repeated (user, item) pairs collapsed
    std::size_t removed_users = 0;   // users under the rating threshold
};

/// Collapses duplicates (latest timestamp wins), drops users with fewer than
/// `min_ratings` ratings, then maps surviving users and rated items to dense
/// indices in ascending external-id order.
PreprocessResult preprocess(const RawRatings& raw, std::size_t min_ratings);

/// Inverse view used for re-ingesting a compacted matrix under its external ids.
RawRatings to_raw(const SparseRatingMatrix& y, const std::vector<std::int64_t>& user_ids,
                  const std::vector<std::int64_t>& item_ids);

// STMAT text format:
//   STMAT 1 <N> <M> <R> <count>
//   <count> lines "i j r", sorted by (i, j)
void save_matrix(std::ostream& out, const SparseRatingMatrix& y);
SparseRatingMatrix load_matrix(std::istream& in);

void save_matrix(const std::string& path, const SparseRatingMatrix& y);
SparseRatingMatrix load_matrix(const std::string& path);

/// Reads and (for MovieLens flavors) preprocesses a dataset file.
PreprocessResult load_dataset(const std::string& path, DatasetFlavor flavor,
                              std::size_t min_ratings);

}  // namespace stmmmf
