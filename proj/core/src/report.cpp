#include "stmmmf/report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace stmmmf {

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

std::string to_json_line(const IterationReport& r) {
    nlohmann::ordered_json j;
    j["iter"] = r.iteration;
    j["observed"] = r.observed;
    j["unobserved"] = r.unobserved;
    j["candidates"] = r.candidates;
    j["augmented"] = r.augmented;
    j["refined"] = r.refined;
    if (r.has_previous) {
        j["overlap"] = r.overlap;
        j["retained_frac"] = r.retained_fraction;
    } else {
        j["overlap"] = nullptr;
        j["retained_frac"] = nullptr;
    }
    j["test_mae"] = r.test.mae;
    j["test_rmse"] = r.test.rmse;
    j["test_n"] = r.test.n;
    j["gap_clamps"] = r.gap_clamps;
    j["threshold_violations"] = r.threshold_violations;
    j["gd_iterations"] = r.gd_iterations;
    j["objective"] = r.objective;
    return j.dump();
}

std::string to_csv_row(const IterationReport& r) {
    std::ostringstream s;
    s << r.iteration << ',' << r.observed << ',' << r.unobserved << ',' << r.candidates << ','
      << r.augmented << ',' << r.refined << ',' << r.overlap << ','
      << fixed(r.retained_fraction, 6) << ',' << fixed(r.test.mae, 6) << ','
      << fixed(r.test.rmse, 6);
    return s.str();
}

void write_iteration_csv(std::ostream& out, std::span<const IterationReport> reports) {
    out << kIterationCsvHeader << '\n';
    for (const auto& r : reports) out << to_csv_row(r) << '\n';
}

void write_rounds_csv(std::ostream& out, std::span<const MetricsSnapshot> rounds) {
    out << kRoundsCsvHeader << '\n';
    for (std::size_t k = 0; k < rounds.size(); ++k) {
        out << k << ',' << fixed(rounds[k].mae, 6) << ',' << fixed(rounds[k].rmse, 6) << '\n';
    }
}

void write_confusion_table(std::ostream& out, const ConfusionMatrix& cm) {
    const int r = cm.max_rating();
    out << "actual\\pred";
    for (int p = 1; p <= r; ++p) out << '\t' << p;
    for (int k = 0; k < r; ++k) out << "\tHR@" << k;
    out << '\n';
    for (int a = 1; a <= r; ++a) {
        out << a;
        for (int p = 1; p <= r; ++p) out << '\t' << cm.count(a, p);
        for (int k = 0; k < r; ++k) {
            const bool applicable = a - k >= 1 || a + k <= r;
            auto hr = hr_at_k(cm, a, k);
            if (!applicable) {
                out << "\t*";
            } else {
                out << '\t' << fixed(hr.value_or(0.0), 4);
            }
        }
        out << '\n';
    }
}

}  // namespace stmmmf
