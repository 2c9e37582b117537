#include "stmmmf/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

#include "stmmmf/errors.hpp"

namespace stmmmf {

namespace {

std::int64_t parse_int(std::string_view field, std::size_t line, const char* what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw parse_error(line, std::string("non-integer ") + what + " '" + std::string(field) +
                                    "'");
    }
    return v;
}

RawRatings parse_delimited(std::istream& in, std::string_view delim, const char* source) {
    RawRatings raw;
    raw.source = source;
    raw.max_rating = 5;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;

        std::string_view rest(text);
        std::string_view fields[4];
        std::size_t count = 0;
        while (true) {
            auto pos = rest.find(delim);
            if (count == 4) throw parse_error(line, "expected 4 fields");
            fields[count++] = rest.substr(0, pos);
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + delim.size());
        }
        if (count != 4) throw parse_error(line, "expected 4 fields");

        RawRating r;
        r.user = parse_int(fields[0], line, "user id");
        r.item = parse_int(fields[1], line, "item id");
        const auto value = parse_int(fields[2], line, "rating");
        r.timestamp = parse_int(fields[3], line, "timestamp");
        if (value < 1 || value > raw.max_rating) {
            throw parse_error(line, "rating " + std::to_string(value) + " outside 1.." +
                                        std::to_string(raw.max_rating));
        }
        r.rating = static_cast<int>(value);
        raw.triples.push_back(r);
    }
    return raw;
}

}  // namespace

DatasetFlavor parse_flavor(const std::string& name) {
    if (name == "ml100k") return DatasetFlavor::ml100k;
    if (name == "ml1m") return DatasetFlavor::ml1m;
    if (name == "stmat") return DatasetFlavor::stmat;
    throw contract_error("unknown dataset flavor '" + name + "' (ml100k | ml1m | stmat)");
}

RawRatings parse_ml100k(std::istream& in) { return parse_delimited(in, "\t", "ml100k"); }

RawRatings parse_ml1m(std::istream& in) { return parse_delimited(in, "::", "ml1m"); }

PreprocessResult preprocess(const RawRatings& raw, std::size_t min_ratings) {
    PreprocessResult out;

    // Latest timestamp wins; on equal timestamps the later line wins.
    std::map<std::pair<std::int64_t, std::int64_t>, RawRating> latest;
    for (const auto& t : raw.triples) {
        auto [it, inserted] = latest.try_emplace({t.user, t.item}, t);
        if (!inserted) {
            ++out.duplicates;
            if (t.timestamp >= it->second.timestamp) it->second = t;
        }
    }

    std::map<std::int64_t, std::size_t> per_user;
    for (const auto& [key, t] : latest) ++per_user[key.first];

    std::map<std::int64_t, Index> user_index;
    for (const auto& [user, n] : per_user) {
        if (n >= min_ratings) {
            user_index.emplace(user, static_cast<Index>(out.user_ids.size()));
            out.user_ids.push_back(user);
        } else {
            ++out.removed_users;
        }
    }

    std::map<std::int64_t, Index> item_index;
    for (const auto& [key, t] : latest) {
        if (user_index.count(key.first) != 0) item_index.emplace(key.second, 0);
    }
    for (auto& [item, idx] : item_index) {
        idx = static_cast<Index>(out.item_ids.size());
        out.item_ids.push_back(item);
    }

    std::vector<Rating> entries;
    entries.reserve(latest.size());
    for (const auto& [key, t] : latest) {
        auto u = user_index.find(key.first);
        if (u == user_index.end()) continue;
        entries.push_back({u->second, item_index.at(key.second), t.rating});
    }
    out.matrix = SparseRatingMatrix(out.user_ids.size(), out.item_ids.size(), raw.max_rating,
                                    std::move(entries));
    return out;
}

RawRatings to_raw(const SparseRatingMatrix& y, const std::vector<std::int64_t>& user_ids,
                  const std::vector<std::int64_t>& item_ids) {
    if (user_ids.size() != y.n_users() || item_ids.size() != y.n_items()) {
        throw shape_error("id maps do not match the matrix shape");
    }
    RawRatings raw;
    raw.source = "matrix";
    raw.max_rating = y.max_rating();
    raw.triples.reserve(y.size());
    for (const auto& e : y.entries()) {
        raw.triples.push_back({user_ids[e.user], item_ids[e.item], e.value, 0});
    }
    return raw;
}

void save_matrix(std::ostream& out, const SparseRatingMatrix& y) {
    out << "STMAT 1 " << y.n_users() << ' ' << y.n_items() << ' ' << y.max_rating() << ' '
        << y.size() << '\n';
    for (const auto& e : y.entries()) out << e.user << ' ' << e.item << ' ' << e.value << '\n';
}

SparseRatingMatrix load_matrix(std::istream& in) {
    std::string text;
    std::size_t line = 1;
    if (!std::getline(in, text)) throw parse_error(line, "missing STMAT header");
    std::istringstream header(text);
    std::string magic;
    int version = 0;
    std::size_t n = 0, m = 0, count = 0;
    int r = 0;
    if (!(header >> magic >> version >> n >> m >> r >> count) || magic != "STMAT") {
        throw parse_error(line, "malformed STMAT header");
    }
    if (version != 1) throw parse_error(line, "unsupported STMAT version");
    if (r < 2) throw parse_error(line, "rating scale must be >= 2");

    std::vector<Rating> entries;
    entries.reserve(count);
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(text);
        long long i = -1, j = -1;
        int v = 0;
        std::string extra;
        if (!(fields >> i >> j >> v) || (fields >> extra)) {
            throw parse_error(line, "expected 'i j r'");
        }
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n ||
            static_cast<std::size_t>(j) >= m || v < 1 || v > r) {
            throw parse_error(line, "entry out of range");
        }
        entries.push_back({static_cast<Index>(i), static_cast<Index>(j), v});
    }
    if (entries.size() != count) {
        throw parse_error(line, "header declares " + std::to_string(count) + " entries, body has " +
                                    std::to_string(entries.size()));
    }
    try {
        return SparseRatingMatrix(n, m, r, std::move(entries));
    } catch (const contract_error& e) {
        throw parse_error(line, e.what());
    }
}

void save_matrix(const std::string& path, const SparseRatingMatrix& y) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_matrix(out, y);
    if (!out) throw std::runtime_error("failed writing " + path);
}

SparseRatingMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_matrix(in);
}

PreprocessResult load_dataset(const std::string& path, DatasetFlavor flavor,
                              std::size_t min_ratings) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    switch (flavor) {
        case DatasetFlavor::ml100k:
            return preprocess(parse_ml100k(in), min_ratings);
        case DatasetFlavor::ml1m:
            return preprocess(parse_ml1m(in), min_ratings);
        case DatasetFlavor::stmat: {
            PreprocessResult out;
            out.matrix = load_matrix(in);
            for (std::size_t i = 0; i < out.matrix.n_users(); ++i) out.user_ids.push_back(static_cast<std::int64_t>(i));
            for (std::size_t j = 0; j < out.matrix.n_items(); ++j) out.item_ids.push_back(static_cast<std::int64_t>(j));
            return out;
        }
    }
    throw contract_error("unknown dataset flavor");
}

}  // namespace stmmmf
