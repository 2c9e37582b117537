#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stmmmf {

using Index = std::uint32_t;

struct Rating {
    Index user = 0;
    Index item = 0;
    int value = 0;

    friend bool operator==(const Rating&, const Rating&) = default;
};

struct Cell {
    Index user = 0;
    Index item = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Observed entries of an N x M ordinal rating matrix on the scale 1..R.
///
/// Unobserved cells are represented by absence; a stored rating is never 0.
/// Entries are kept sorted by (user, item) with per-user offsets, so a row is
/// a contiguous span and membership is a binary search within that row.
/// Instances are immutable; the augmentation and refinement operations
/// return new matrices.
class SparseRatingMatrix {
public:
    SparseRatingMatrix() = default;

    /// Throws contract_error on duplicate cells, ratings outside 1..R,
    /// indices outside the grid, or R < 2.
    SparseRatingMatrix(std::size_t n_users, std::size_t n_items, int max_rating,
                       std::vector<Rating> entries);

    std::size_t n_users() const noexcept { return n_users_; }
    std::size_t n_items() const noexcept { return n_items_; }
    int max_rating() const noexcept { return max_rating_; }

    /// |Omega|
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t cell_count() const noexcept { return n_users_ * n_items_; }
    std::size_t unobserved_count() const noexcept { return cell_count() - size(); }

    std::span<const Rating> entries() const noexcept { return entries_; }
    std::span<const Rating> row(Index user) const;

    std::optional<int> at(Index user, Index item) const;
    bool contains(Index user, Index item) const { return at(user, item).has_value(); }

    /// Count of entries per label; index 0 holds rating 1.
    std::vector<std::size_t> rating_counts() const;
    /// Share of each label among the observed entries (all zero when empty).
    std::vector<double> rating_shares() const;

    /// Order-sensitive FNV-1a digest of the shape and entries.
    std::uint64_t fingerprint() const noexcept;

    bool same_shape(const SparseRatingMatrix& other) const noexcept {
        return n_users_ == other.n_users_ && n_items_ == other.n_items_ &&
               max_rating_ == other.max_rating_;
    }

    friend bool operator==(const SparseRatingMatrix& a, const SparseRatingMatrix& b) {
        return a.same_shape(b) && a.entries_ == b.entries_;
    }

private:
    std::size_t n_users_ = 0;
    std::size_t n_items_ = 0;
    int max_rating_ = 2;
    std::vector<Rating> entries_;
    std::vector<std::size_t> row_offsets_{0};
};

}  // namespace stmmmf
