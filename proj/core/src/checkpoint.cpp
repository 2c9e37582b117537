#include "stmmmf/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "stmmmf/errors.hpp"

namespace stmmmf {

namespace {

void write_block(std::ostream& out, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << ' ';
            out << row[c];
        }
        out << '\n';
    }
}

void read_block(std::istream& in, Matrix& m, std::size_t& line, const char* name) {
    std::string text;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        ++line;
        if (!std::getline(in, text)) throw parse_error(line, std::string("truncated ") + name);
        std::istringstream fields(text);
        auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!(fields >> row[c]) || !std::isfinite(row[c])) {
                throw parse_error(line, std::string("bad value in ") + name);
            }
        }
        std::string extra;
        if (fields >> extra) throw parse_error(line, std::string("extra values in ") + name);
    }
}

}  // namespace

void save_checkpoint(std::ostream& out, const FactorModel& model) {
    out << "STMMMF 1 " << model.n_users() << ' ' << model.n_items() << ' ' << model.dim() << ' '
        << model.max_rating << '\n';
    const auto old_precision = out.precision(17);
    write_block(out, model.user_factors);
    write_block(out, model.item_factors);
    write_block(out, model.thresholds);
    out.precision(old_precision);
}

FactorModel load_checkpoint(std::istream& in) {
    std::string header;
    std::size_t line = 1;
    if (!std::getline(in, header)) throw parse_error(line, "missing STMMMF header");
    std::istringstream fields(header);
    std::string magic;
    int version = 0;
    std::size_t n = 0, m = 0, d = 0;
    int r = 0;
    if (!(fields >> magic >> version >> n >> m >> d >> r) || magic != "STMMMF") {
        throw parse_error(line, "malformed STMMMF header");
    }
    if (version != 1) throw parse_error(line, "unsupported checkpoint version");
    if (d == 0 || r < 2) throw parse_error(line, "invalid dimension or rating scale");
    FactorModel model(n, m, d, r);
    read_block(in, model.user_factors, line, "user factors");
    read_block(in, model.item_factors, line, "item factors");
    read_block(in, model.thresholds, line, "thresholds");
    return model;
}

void save_checkpoint(const std::string& path, const FactorModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_checkpoint(out, model);
    if (!out) throw std::runtime_error("failed writing " + path);
}

FactorModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_checkpoint(in);
}

}  // namespace stmmmf
