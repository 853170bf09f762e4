// Benchmark CLI for the external-memory dictionary: oracle verification
// runs, parameter sweeps with CSV output, and per-op I/O traces.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emdict/dictionary.hpp"
#include "emdict/workload.hpp"

namespace {

struct CommonFlags {
    std::uint64_t n = 1ull << 18;
    std::uint32_t B = 64;
    std::uint64_t M = 1ull << 16;
    std::vector<std::uint32_t> lambdas = {16};
    std::uint32_t tmin = 0;
    std::uint64_t seed = 1;
    std::string mix = "45:10:45";
    std::uint64_t ops = 100000;
    std::string structure = "both";
    std::string page_file;
    long long corrupt_page = -1;
    std::uint64_t corrupt_at = 0;
};

bool parse_mix(const std::string& mix, emdict::WorkloadSpec& spec) {
    int i = 0, d = 0, l = 0;
    if (std::sscanf(mix.c_str(), "%d:%d:%d", &i, &d, &l) != 3) return false;
    spec.insert_pct = i;
    spec.delete_pct = d;
    spec.lookup_pct = l;
    return true;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool lambda_list) {
    cmd->add_option("--n", f.n, "max live keys (n_max, also the workload n)");
    cmd->add_option("--B", f.B, "words per page");
    cmd->add_option("--M", f.M, "cache size in words");
    if (lambda_list) {
        cmd->add_option("--lambda", f.lambdas, "trade-off knob(s), comma separated")
            ->delimiter(',');
    } else {
        cmd->add_option(
            "--lambda", [&f](const std::vector<std::string>& vals) {
                f.lambdas = {static_cast<std::uint32_t>(std::stoul(vals.back()))};
                return true;
            },
            "trade-off knob");
    }
    cmd->add_option("--tmin", f.tmin, "override t_min (default: derived from lambda)");
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--mix", f.mix, "insert:delete:lookup percentages (sum 100)");
    cmd->add_option("--ops", f.ops, "operation count");
    cmd->add_option("--structure", f.structure, "new|baseline|both");
    cmd->add_option("--page-file", f.page_file,
                    "save the dictionary page file + manifest here at the end");
}

emdict::WorkloadSpec make_spec(const CommonFlags& f) {
    emdict::WorkloadSpec spec;
    spec.n_ops = f.ops;
    spec.n_keys = f.n;
    spec.seed = f.seed;
    if (!parse_mix(f.mix, spec)) throw emdict::bad_parameters("--mix must be I:D:L");
    spec.validate();
    return spec;
}

emdict::DictConfig make_config(const CommonFlags& f) {
    emdict::DictConfig cfg;
    cfg.n_max = f.n;
    cfg.page_words = f.B;
    cfg.cache_words = f.M;
    cfg.lambda = f.lambdas.front();
    cfg.t_min = f.tmin;
    cfg.seed = f.seed;
    return cfg;
}

int save_if_requested(const CommonFlags& f, const emdict::WorkloadSpec& spec,
                      const emdict::DictConfig& cfg) {
    if (f.page_file.empty()) return 0;
    emdict::Dictionary dict(cfg);
    emdict::WorkloadGen gen(spec);
    for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
        const emdict::Op op = gen.next();
        switch (op.kind) {
            case emdict::Op::Kind::Insert: dict.insert(op.key, op.value); break;
            case emdict::Op::Kind::Delete: dict.erase(op.key); break;
            case emdict::Op::Kind::Lookup: dict.lookup(op.key); break;
        }
    }
    dict.save(f.page_file, f.page_file + ".manifest");
    std::cerr << "saved dictionary state to " << f.page_file << " (+.manifest)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hashing-based external-memory dictionary benchmark harness"};
    app.require_subcommand(1);

    CommonFlags vf, sf, tf;
    CLI::App* verify = app.add_subcommand("verify", "lockstep oracle verification run");
    add_common(verify, vf, false);
    verify->add_option("--corrupt-page", vf.corrupt_page,
                       "fault injection: page id to corrupt mid-run");
    verify->add_option("--corrupt-at", vf.corrupt_at, "op index for the fault injection");

    CLI::App* sweep = app.add_subcommand("sweep", "lambda sweep, CSV on stdout");
    add_common(sweep, sf, true);

    CLI::App* trace = app.add_subcommand("trace", "per-op I/O trace on stdout");
    add_common(trace, tf, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            const auto spec = make_spec(vf);
            const auto cfg = make_config(vf);
            emdict::VerifyOptions opts;
            opts.corrupt_page = vf.corrupt_page;
            opts.corrupt_at_op = vf.corrupt_at;
            const int rc = emdict::run_verify(spec, cfg, std::cout, std::cerr, opts);
            if (rc == 0) save_if_requested(vf, spec, cfg);
            return rc;
        }
        if (sweep->parsed()) {
            const auto spec = make_spec(sf);
            const auto cfg = make_config(sf);
            std::ostringstream csv;
            const int rc = emdict::run_sweep(spec, cfg, sf.lambdas,
                                             sf.structure.empty() ? "both" : sf.structure, csv,
                                             std::cerr);
            if (rc != 0) return rc;
            std::cout << csv.str();
            save_if_requested(sf, spec, cfg);
            return 0;
        }
        if (trace->parsed()) {
            const auto spec = make_spec(tf);
            const auto cfg = make_config(tf);
            const std::string structure = tf.structure == "both" ? "new" : tf.structure;
            const int rc = emdict::run_trace(spec, cfg, structure, std::cout, std::cerr);
            if (rc == 0) save_if_requested(tf, spec, cfg);
            return rc;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
