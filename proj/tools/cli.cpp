#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <regex>
#include <thread>

#include "CLI11.hpp"
#include "stmmmf/baseline.hpp"
#include "stmmmf/checkpoint.hpp"
#include "stmmmf/errors.hpp"
#include "stmmmf/eval.hpp"
#include "stmmmf/ingest.hpp"
#include "stmmmf/report.hpp"
#include "stmmmf/selftrain.hpp"
#include "stmmmf/trainer.hpp"

namespace fs = std::filesystem;

namespace stmmmf::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
    const char* env = std::getenv(kOutDirEnv);
    return env != nullptr && *env != '\0' ? env : ".";
}

/// Flags shared by selftrain and gridsearch, in the CLI's percent convention.
struct LoopFlags {
    std::size_t dim = 10;
    double lambda = Hyperparams{}.lambda;
    double lr = Hyperparams{}.learning_rate;
    std::size_t gd_iters = Hyperparams{}.max_iters;
    double tol = Hyperparams{}.tol;
    double tau1_pct = 49.99;
    double tau2_pct = 10.0;
    double sample_pct = 100.0;
    std::size_t cap = 5000;
    std::size_t iters = 50;
    std::size_t patience = 5;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    bool nondeterministic = false;

    void add_to(CLI::App& app, bool with_search_axes) {
        app.add_option("--dim", dim, "Latent dimension d")->capture_default_str();
        app.add_option("--lr", lr, "Initial learning rate c")->capture_default_str();
        app.add_option("--gd-iters", gd_iters, "Gradient steps per fit (t1)")->capture_default_str();
        app.add_option("--tol", tol, "Relative objective decrease to stop a fit")->capture_default_str();
        app.add_option("--tau2", tau2_pct, "Refinement band, percent of the threshold gap")
            ->capture_default_str();
        app.add_option("--cap", cap, "Augmentations per iteration")->capture_default_str();
        app.add_option("--iters", iters, "Self-training iterations (t2)")->capture_default_str();
        app.add_option("--patience", patience,
                       "Stop after this many consecutive rises in test MAE (0 = off)")
            ->capture_default_str();
        app.add_option("--seed", seed, "RNG seed")->capture_default_str();
        app.add_option("--threads", threads, "Worker threads for gradient accumulation")
            ->capture_default_str();
        app.add_flag("--nondeterministic", nondeterministic,
                     "Allow thread-order floating-point reduction");
        if (!with_search_axes) {
            app.add_option("--lambda", lambda, "Regularization weight")->capture_default_str();
            app.add_option("--tau1", tau1_pct, "Confidence shift, percent of the threshold gap")
                ->capture_default_str();
            app.add_option("--sample-pct", sample_pct, "Sampling percentage s")
                ->capture_default_str();
        }
    }

    SelfTrainConfig config(double lambda_value, double tau1_percent, double sample) const {
        SelfTrainConfig cfg;
        cfg.inner.lambda = lambda_value;
        cfg.inner.learning_rate = lr;
        cfg.inner.max_iters = gd_iters;
        cfg.inner.tol = tol;
        cfg.inner.seed = seed;
        cfg.inner.threads = threads;
        cfg.inner.deterministic = !nondeterministic;
        cfg.dim = dim;
        cfg.tau1 = tau1_percent / 100.0;
        cfg.tau2 = tau2_pct / 100.0;
        cfg.sample_pct = sample;
        cfg.cap = cap;
        cfg.max_iters = iters;
        cfg.patience = patience;
        try {
            cfg.validate();
        } catch (const contract_error& e) {
            throw UsageError(std::string(e.what()) + " (tau flags are percentages: 0 < tau2 < tau1 < 50)");
        }
        return cfg;
    }
};

void require_file(const std::string& path) {
    if (!fs::is_regular_file(path)) throw std::runtime_error("cannot read " + path);
}

struct IngestArgs {
    std::string flavor = "ml100k";
    std::string input;
    std::string out;
    std::size_t min_ratings = 20;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
    const auto flavor = parse_flavor(a.flavor);
    require_file(a.input);
    auto ds = load_dataset(a.input, flavor, a.min_ratings);
    const auto& y = ds.matrix;
    const std::string dest = a.out.empty() ? (fs::path(default_out_dir()) / "y.stmat").string() : a.out;
    save_matrix(dest, y);
    out << y.n_users() << ' ' << y.n_items() << ' ' << y.max_rating() << ' ' << y.size() << '\n';
    const double density =
        y.cell_count() == 0 ? 0.0 : static_cast<double>(y.size()) / static_cast<double>(y.cell_count());
    out << "sparsity " << std::fixed << std::setprecision(6) << 1.0 - density << '\n';
    if (ds.duplicates > 0) out << "duplicates " << ds.duplicates << '\n';
    if (ds.removed_users > 0) out << "removed_users " << ds.removed_users << '\n';
    return kExitOk;
}

struct SplitArgs {
    std::string input;
    double frac = 0.8;
    std::uint64_t seed = 1;
    std::string out_dir;
};

int cmd_split(const SplitArgs& a, std::ostream& out) {
    if (!(a.frac > 0.0 && a.frac < 1.0)) throw UsageError("--frac must lie strictly between 0 and 1");
    require_file(a.input);
    auto y = load_matrix(a.input);
    auto [train, test] = split(y, a.frac, a.seed);
    const fs::path dir = a.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(a.out_dir);
    fs::create_directories(dir);
    save_matrix((dir / "train.stmat").string(), train);
    save_matrix((dir / "test.stmat").string(), test);
    out << "train " << train.size() << '\n' << "test " << test.size() << '\n';
    return kExitOk;
}

struct SelftrainArgs {
    LoopFlags loop;
    std::string train;
    std::string test;
    std::string out_dir;
    std::size_t snapshot_every = 0;
};

std::string snapshot_name(std::size_t round) {
    std::ostringstream s;
    s << "round_" << std::setw(4) << std::setfill('0') << round << ".stmat";
    return s.str();
}

int cmd_selftrain(const SelftrainArgs& a, std::ostream& out, std::ostream& err) {
    const auto cfg = a.loop.config(a.loop.lambda, a.loop.tau1_pct, a.loop.sample_pct);
    require_file(a.train);
    require_file(a.test);
    const auto train = load_matrix(a.train);
    const auto test = load_matrix(a.test);

    const fs::path dir = a.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(a.out_dir);
    fs::create_directories(dir);
    if (a.snapshot_every > 0) {
        fs::create_directories(dir / "snapshots");
        save_matrix((dir / "snapshots" / snapshot_name(0)).string(), train);
    }

    out << "tau1=" << cfg.tau1 << " tau2=" << cfg.tau2
        << " (fractions of the average threshold gap) s=" << cfg.sample_pct << " cap=" << cfg.cap
        << " lambda=" << cfg.inner.lambda << " d=" << cfg.dim << '\n';

    std::ofstream jsonl(dir / "iterations.jsonl");
    std::ofstream csv(dir / "iterations.csv");
    if (!jsonl || !csv) throw std::runtime_error("cannot write reports under " + dir.string());
    csv << kIterationCsvHeader << '\n';

    auto result = selftrain_loop(train, cfg, test, [&](const IterationView& v) {
        jsonl << to_json_line(v.report) << '\n' << std::flush;
        csv << to_csv_row(v.report) << '\n' << std::flush;
        out << to_csv_row(v.report) << '\n';
        if (a.snapshot_every > 0 && v.report.iteration % a.snapshot_every == 0) {
            save_matrix((dir / "snapshots" / snapshot_name(v.report.iteration)).string(), v.next);
        }
    });

    if (result.stop == StopReason::divergence) {
        err << "divergence: " << result.error << " (reports kept in " << dir.string() << ")\n";
        if (!result.reports.empty()) save_checkpoint((dir / "model.ckpt").string(), result.model);
        return kExitFailure;
    }
    save_checkpoint((dir / "model.ckpt").string(), result.model);
    save_matrix((dir / "final.stmat").string(), result.final_matrix);
    out << "stop " << to_string(result.stop) << " after " << result.reports.size()
        << " iterations\n";
    return kExitOk;
}

struct EvaluateArgs {
    std::string model;
    std::string test;
    std::string train;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    require_file(a.model);
    require_file(a.test);
    const auto model = load_checkpoint(a.model);
    const auto test = load_matrix(a.test);
    if (!model.matches(test)) {
        throw shape_error("checkpoint is " + std::to_string(model.n_users()) + "x" +
                          std::to_string(model.n_items()) + ", test matrix is " +
                          std::to_string(test.n_users()) + "x" + std::to_string(test.n_items()));
    }
    std::vector<PredictionPair> pairs;
    if (!a.train.empty()) {
        require_file(a.train);
        pairs = predict_pairs(model, load_matrix(a.train), test);
    } else {
        pairs = predict_pairs(model, test);
    }
    const auto m = metrics(pairs);
    out << std::fixed << std::setprecision(6) << "MAE " << m.mae << '\n'
        << "RMSE " << m.rmse << '\n'
        << "n " << m.n << '\n';
    write_confusion_table(out, confusion(pairs, model.max_rating));
    return kExitOk;
}

struct GridArgs {
    LoopFlags loop;
    std::string train;
    std::string out;
    std::size_t runs = 1;
    std::size_t jobs = 1;
    double holdout = 0.1;
    std::vector<double> lambda_grid;
    std::vector<double> tau1_grid;
    std::vector<double> sample_grid;
};

struct GridRow {
    double lambda = 0.0;
    double tau1_pct = 0.0;
    double sample_pct = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

int cmd_gridsearch(GridArgs a, std::ostream& out, std::ostream& err) {
    if (a.lambda_grid.empty()) a.lambda_grid = default_lambda_grid();
    if (a.tau1_grid.empty()) a.tau1_grid = default_tau1_grid();
    if (a.sample_grid.empty()) a.sample_grid = default_sample_grid();
    if (a.runs == 0) throw UsageError("--runs must be >= 1");
    if (!(a.holdout > 0.0 && a.holdout < 1.0)) throw UsageError("--holdout must lie in (0, 1)");

    struct Cell { double lambda, tau1, sample; };
    std::vector<Cell> cells;
    for (double l : a.lambda_grid) {
        for (double t : a.tau1_grid) {
            for (double s : a.sample_grid) {
                a.loop.config(l, t, s);  // validates every cell before any work starts
                cells.push_back({l, t, s});
            }
        }
    }
    require_file(a.train);
    const auto train = load_matrix(a.train);

    std::ofstream csv(a.out);
    if (!csv) throw std::runtime_error("cannot write " + a.out);
    csv << "lambda,tau1,s,mae,rmse\n" << std::flush;

    std::vector<std::optional<GridRow>> rows(cells.size());
    std::size_t flushed = 0;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::string failure;

    auto work = [&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) {
            GridRow row{cells[c].lambda, cells[c].tau1, cells[c].sample, 0.0, 0.0};
            try {
                for (std::size_t run = 0; run < a.runs; ++run) {
                    auto cfg = a.loop.config(cells[c].lambda, cells[c].tau1, cells[c].sample);
                    cfg.inner.seed = a.loop.seed + run;
                    auto [fit_part, holdout] = split(train, 1.0 - a.holdout, cfg.inner.seed);
                    auto res = selftrain_loop(fit_part, cfg, holdout);
                    if (res.stop == StopReason::divergence || res.reports.empty()) {
                        throw divergence_error(res.error.empty() ? "no iterations completed" : res.error);
                    }
                    row.mae += res.reports.back().test.mae / static_cast<double>(a.runs);
                    row.rmse += res.reports.back().test.rmse / static_cast<double>(a.runs);
                }
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                if (failure.empty()) failure = e.what();
                next = cells.size();
                return;
            }
            std::lock_guard lock(mu);
            rows[c] = row;
            // Rows leave in grid order whatever the completion order.
            while (flushed < rows.size() && rows[flushed]) {
                const auto& r = *rows[flushed];
                csv << std::setprecision(10) << r.lambda << ',' << r.tau1_pct << ','
                    << r.sample_pct << ',' << std::fixed << std::setprecision(6) << r.mae << ','
                    << r.rmse << std::defaultfloat << '\n'
                    << std::flush;
                ++flushed;
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(a.jobs, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    if (!failure.empty()) {
        err << "gridsearch aborted: " << failure << " (" << flushed << " rows kept in " << a.out
            << ")\n";
        return kExitFailure;
    }
    const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
        return x->mae < y->mae;
    });
    out << "best lambda=" << (*best)->lambda << " tau1=" << (*best)->tau1_pct
        << " s=" << (*best)->sample_pct << std::fixed << std::setprecision(6)
        << " mae=" << (*best)->mae << " rmse=" << (*best)->rmse << '\n';
    return kExitOk;
}

struct RoundsArgs {
    std::string snapshots;
    std::string test;
    std::string out;
    std::size_t max_rounds = 0;
    BaselineConfig baseline;
};

int cmd_baseline_rounds(const RoundsArgs& a, std::ostream& out, std::ostream& err) {
    std::map<std::size_t, fs::path> found;
    if (fs::is_directory(a.snapshots)) {
        const std::regex pattern(R"(round_(\d+)\.stmat)");
        for (const auto& entry : fs::directory_iterator(a.snapshots)) {
            std::smatch m;
            const std::string name = entry.path().filename().string();
            if (std::regex_match(name, m, pattern)) found.emplace(std::stoul(m[1].str()), entry.path());
        }
    }
    if (found.empty()) {
        err << "no round_NNNN.stmat snapshots in '" << a.snapshots
            << "'; run `stmmmf selftrain --snapshot-every 1 ...` first\n";
        return kExitFailure;
    }
    require_file(a.test);
    const auto test = load_matrix(a.test);

    std::vector<SparseRatingMatrix> rounds;
    for (const auto& [round, path] : found) {
        if (a.max_rounds > 0 && rounds.size() >= a.max_rounds) break;
        rounds.push_back(without_cells(load_matrix(path.string()), test));
    }
    const auto snaps = rounds_experiment(rounds, test, a.baseline);

    const std::string dest =
        a.out.empty() ? (fs::path(default_out_dir()) / "baseline_rounds.csv").string() : a.out;
    std::ofstream csv(dest);
    if (!csv) throw std::runtime_error("cannot write " + dest);
    csv << kRoundsCsvHeader << '\n';
    std::size_t k = 0;
    for (const auto& [round, path] : found) {
        if (k >= snaps.size()) break;
        csv << round << ',' << std::fixed << std::setprecision(6) << snaps[k].mae << ','
            << snaps[k].rmse << '\n';
        out << "round " << round << " mae " << std::fixed << std::setprecision(6) << snaps[k].mae
            << " rmse " << snaps[k].rmse << '\n';
        ++k;
    }
    return kExitOk;
}

}  // namespace

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 40; i += 4) grid.push_back(std::pow(10.0, i / 16.0));
    return grid;
}

std::vector<double> default_tau1_grid() { return {5, 10, 15, 20, 25, 30, 35, 40, 45, 49.99}; }

std::vector<double> default_sample_grid() { return {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-training maximum margin matrix factorization"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse and preprocess a ratings file into STMAT");
    ingest_cmd->add_option("input", ingest.input, "Ratings file")->required();
    ingest_cmd->add_option("--flavor", ingest.flavor, "ml100k | ml1m | stmat")->capture_default_str();
    ingest_cmd->add_option("--out", ingest.out, "Destination STMAT file");
    ingest_cmd->add_option("--min-ratings", ingest.min_ratings, "Drop users with fewer ratings")
        ->capture_default_str();

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "Seeded random train/test split");
    split_cmd->add_option("input", split_args.input, "STMAT matrix")->required();
    split_cmd->add_option("--frac", split_args.frac, "Training fraction")->capture_default_str();
    split_cmd->add_option("--seed", split_args.seed, "RNG seed")->capture_default_str();
    split_cmd->add_option("--out-dir", split_args.out_dir, "Directory for train/test.stmat");

    SelftrainArgs st;
    auto* st_cmd = app.add_subcommand("selftrain", "Run the self-training loop");
    st.loop.add_to(*st_cmd, false);
    st_cmd->add_option("--train", st.train, "Training STMAT")->required();
    st_cmd->add_option("--test", st.test, "Test STMAT")->required();
    st_cmd->add_option("--out-dir", st.out_dir, "Directory for reports and checkpoint");
    st_cmd->add_option("--snapshot-every", st.snapshot_every,
                       "Save the training matrix every k iterations (0 = off)")
        ->capture_default_str();

    EvaluateArgs ev;
    auto* ev_cmd = app.add_subcommand("evaluate", "Score a checkpoint on a test matrix");
    ev_cmd->add_option("--model", ev.model, "STMMMF checkpoint")->required();
    ev_cmd->add_option("--test", ev.test, "Test STMAT")->required();
    ev_cmd->add_option("--train", ev.train, "Training STMAT (enables the cold-user fallback)");

    GridArgs grid;
    auto* grid_cmd = app.add_subcommand("gridsearch", "Sweep lambda, tau1 and s on a hold-out");
    grid.loop.add_to(*grid_cmd, true);
    grid_cmd->add_option("--train", grid.train, "Training STMAT")->required();
    grid_cmd->add_option("--out", grid.out, "Result CSV")->required();
    grid_cmd->add_option("--runs", grid.runs, "Seeds averaged per cell")->capture_default_str();
    grid_cmd->add_option("--jobs", grid.jobs, "Cells evaluated in parallel")->capture_default_str();
    grid_cmd->add_option("--holdout", grid.holdout, "Fraction of train held out")->capture_default_str();
    grid_cmd->add_option("--lambda-grid", grid.lambda_grid, "Comma-separated lambda values")
        ->delimiter(',');
    grid_cmd->add_option("--tau1-grid", grid.tau1_grid, "Comma-separated tau1 percentages")
        ->delimiter(',');
    grid_cmd->add_option("--sample-grid", grid.sample_grid, "Comma-separated s percentages")
        ->delimiter(',');

    RoundsArgs rounds;
    auto* rounds_cmd =
        app.add_subcommand("baseline-rounds", "Retrain the biased-MF baseline on each snapshot");
    rounds_cmd->add_option("--snapshots", rounds.snapshots, "Directory of round_NNNN.stmat")->required();
    rounds_cmd->add_option("--test", rounds.test, "Test STMAT")->required();
    rounds_cmd->add_option("--out", rounds.out, "Destination CSV");
    rounds_cmd->add_option("--max-rounds", rounds.max_rounds, "Use at most this many snapshots");
    rounds_cmd->add_option("--dim", rounds.baseline.dim, "Baseline factors")->capture_default_str();
    rounds_cmd->add_option("--lambda", rounds.baseline.lambda, "Baseline regularization")
        ->capture_default_str();
    rounds_cmd->add_option("--epochs", rounds.baseline.epochs, "Passes over the data")
        ->capture_default_str();
    rounds_cmd->add_option("--lr", rounds.baseline.learning_rate, "Baseline step size")
        ->capture_default_str();
    rounds_cmd->add_option("--seed", rounds.baseline.seed, "RNG seed")->capture_default_str();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(ingest, out);
        if (*split_cmd) return cmd_split(split_args, out);
        if (*st_cmd) return cmd_selftrain(st, out, err);
        if (*ev_cmd) return cmd_evaluate(ev, out);
        if (*grid_cmd) return cmd_gridsearch(grid, out, err);
        if (*rounds_cmd) return cmd_baseline_rounds(rounds, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const parse_error& e) {
        err << "parse error at " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace stmmmf::cli
