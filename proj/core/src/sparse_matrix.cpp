#include "stmmmf/sparse_matrix.hpp"

#include <algorithm>
#include <string>

#include "stmmmf/errors.hpp"

namespace stmmmf {

SparseRatingMatrix::SparseRatingMatrix(std::size_t n_users, std::size_t n_items, int max_rating,
                                       std::vector<Rating> entries)
    : n_users_(n_users), n_items_(n_items), max_rating_(max_rating), entries_(std::move(entries)) {
    if (max_rating_ < 2) {
        throw contract_error("rating scale must have at least two levels, got R=" +
                             std::to_string(max_rating_));
    }
    for (const auto& e : entries_) {
        if (e.user >= n_users_ || e.item >= n_items_) {
            throw contract_error("entry (" + std::to_string(e.user) + ", " +
                                 std::to_string(e.item) + ") outside " +
                                 std::to_string(n_users_) + "x" + std::to_string(n_items_));
        }
        if (e.value < 1 || e.value > max_rating_) {
            throw contract_error("rating " + std::to_string(e.value) + " outside 1.." +
                                 std::to_string(max_rating_));
        }
    }
    std::sort(entries_.begin(), entries_.end(), [](const Rating& a, const Rating& b) {
        return a.user != b.user ? a.user < b.user : a.item < b.item;
    });
    auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                  [](const Rating& a, const Rating& b) {
                                      return a.user == b.user && a.item == b.item;
                                  });
    if (dup != entries_.end()) {
        throw contract_error("duplicate entry (" + std::to_string(dup->user) + ", " +
                             std::to_string(dup->item) + ")");
    }

    row_offsets_.assign(n_users_ + 1, 0);
    for (const auto& e : entries_) ++row_offsets_[e.user + 1];
    for (std::size_t i = 0; i < n_users_; ++i) row_offsets_[i + 1] += row_offsets_[i];
}

std::span<const Rating> SparseRatingMatrix::row(Index user) const {
    if (user >= n_users_) throw contract_error("user index out of range");
    return std::span<const Rating>(entries_).subspan(
        row_offsets_[user], row_offsets_[user + 1] - row_offsets_[user]);
}

std::optional<int> SparseRatingMatrix::at(Index user, Index item) const {
    if (item >= n_items_) throw contract_error("item index out of range");
    auto r = row(user);
    auto it = std::lower_bound(r.begin(), r.end(), item,
                               [](const Rating& e, Index j) { return e.item < j; });
    if (it != r.end() && it->item == item) return it->value;
    return std::nullopt;
}

std::vector<std::size_t> SparseRatingMatrix::rating_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_rating_), 0);
    for (const auto& e : entries_) ++counts[static_cast<std::size_t>(e.value - 1)];
    return counts;
}

std::vector<double> SparseRatingMatrix::rating_shares() const {
    auto counts = rating_counts();
    std::vector<double> shares(counts.size(), 0.0);
    if (entries_.empty()) return shares;
    for (std::size_t r = 0; r < counts.size(); ++r) {
        shares[r] = static_cast<double>(counts[r]) / static_cast<double>(entries_.size());
    }
    return shares;
}

std::uint64_t SparseRatingMatrix::fingerprint() const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    mix(n_users_);
    mix(n_items_);
    mix(static_cast<std::uint64_t>(max_rating_));
    for (const auto& e : entries_) {
        mix(e.user);
        mix(e.item);
        mix(static_cast<std::uint64_t>(e.value));
    }
    return h;
}

}  // namespace stmmmf
