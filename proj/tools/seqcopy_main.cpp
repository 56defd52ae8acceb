// seqcopy command line: preprocess / train / decode / eval.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqcopy/checkpoint.hpp"
#include "seqcopy/corpus.hpp"
#include "seqcopy/error.hpp"
#include "seqcopy/metrics.hpp"
#include "seqcopy/model.hpp"
#include "seqcopy/search.hpp"
#include "seqcopy/trainer.hpp"
#include "seqcopy/vocab.hpp"

namespace fs = std::filesystem;
using namespace seqcopy;

namespace {

// --config files are flat `key=value` lines ('#' comments, blank lines ok)
// where each key is a long option name of the subcommand. The file is
// expanded into option arguments placed right after the subcommand name, so
// explicit command-line flags override file values (options take the last
// occurrence).
std::vector<std::string> config_file_args(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path);
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::vector<std::string> args;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(line_no) + " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw FormatError("config line " + std::to_string(line_no) + " has an empty key");
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

// Expands `--config FILE` in place; returns the rewritten argument list.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw InvalidArgument("--config needs a file path");
            if (!path.empty()) throw InvalidArgument("--config given twice");
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            if (!path.empty()) throw InvalidArgument("--config given twice");
            path = args[i].substr(9);
            args.erase(args.begin() + i);
        } else {
            ++i;
        }
    }
    if (!path.empty()) {
        if (args.empty()) throw InvalidArgument("--config requires a subcommand");
        const auto file_args = config_file_args(path);
        args.insert(args.begin() + 1, file_args.begin(), file_args.end());
    }
    return args;
}

std::vector<std::vector<std::string>> side(const std::vector<RawPair>& pairs, bool source) {
    std::vector<std::vector<std::string>> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(source ? p.source : p.target);
    return out;
}

void write_instances(const std::vector<TrainingInstance>& instances, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    for (const auto& inst : instances) {
        for (std::size_t i = 0; i < inst.x.size(); ++i) out << (i ? " " : "") << inst.x[i];
        out << '\t';
        for (std::size_t i = 0; i < inst.y.size(); ++i) out << (i ? " " : "") << inst.y[i];
        out << '\t';
        for (std::size_t i = 0; i < inst.spans.size(); ++i) {
            const CopySpan& s = inst.spans[i];
            out << (i ? " " : "") << s.tgt_start << ':' << s.tgt_end << ':' << s.src_start << ':'
                << s.src_end;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------- preprocess

struct PreprocessArgs {
    std::string train_path;
    std::string out_dir = ".";
    int min_count = 20;
    int max_copy_len = 5;
};

int run_preprocess(const PreprocessArgs& args) {
    const auto pairs = read_corpus(args.train_path);
    const Vocabulary src_vocab = Vocabulary::build(side(pairs, true), args.min_count);
    const Vocabulary tgt_vocab = Vocabulary::build(side(pairs, false), args.min_count);

    fs::create_directories(args.out_dir);
    src_vocab.save(args.out_dir + "/vocab.src");
    tgt_vocab.save(args.out_dir + "/vocab.tgt");

    const auto instances = make_instances(pairs, src_vocab, tgt_vocab, args.max_copy_len);
    write_instances(instances, args.out_dir + "/instances.tsv");

    const CorpusStats stats = corpus_stats(instances);
    std::ofstream report(args.out_dir + "/corpus_stats.txt", std::ios::binary);
    auto emit = [&](std::ostream& os) {
        os << "pairs\t" << pairs.size() << '\n';
        os << "src_vocab\t" << src_vocab.size() << '\n';
        os << "tgt_vocab\t" << tgt_vocab.size() << '\n';
        os << "fraction_generated\t" << stats.fraction_generated << '\n';
        os << "fraction_single_copy\t" << stats.fraction_single_copy << '\n';
        os << "fraction_multi_copy\t" << stats.fraction_multi_copy << '\n';
    };
    emit(report);
    emit(std::cout);
    return 0;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
    std::string train_path, dev_path, src_vocab_path, tgt_vocab_path;
    std::string ckpt_dir = "checkpoints";
    int emb_size = 300;
    int hidden = 512;
    std::string dev_metric = "loss";
    int dev_decode_steps = 60;
    TrainConfig cfg;
};

int run_train(const TrainArgs& args) {
    const Vocabulary src_vocab = Vocabulary::load(args.src_vocab_path);
    const Vocabulary tgt_vocab = Vocabulary::load(args.tgt_vocab_path);

    const auto train_pairs = read_corpus(args.train_path);
    const auto dev_pairs = read_corpus(args.dev_path);
    const auto train_set = make_instances(train_pairs, src_vocab, tgt_vocab, args.cfg.max_copy_len);
    const auto dev_set = make_instances(dev_pairs, src_vocab, tgt_vocab, args.cfg.max_copy_len);

    ModelDims dims;
    dims.emb_size = args.emb_size;
    dims.hidden = args.hidden;
    dims.src_vocab = src_vocab.size();
    dims.tgt_vocab = tgt_vocab.size();
    dims.max_copy_len = args.cfg.max_copy_len;
    SeqCopyModel model(dims);
    Rng init_rng(args.cfg.seed);
    model.init_params(init_rng);

    fs::create_directories(args.ckpt_dir);
    std::ofstream log_file(args.ckpt_dir + "/train.log", std::ios::binary);

    TrainHooks hooks;
    hooks.checkpoint = [&](std::int64_t step, SeqCopyModel& m) {
        save_model(m, args.ckpt_dir + "/ckpt-" + std::to_string(step) + ".bin");
    };
    if (args.dev_metric == "rouge2") {
        hooks.higher_is_better = true;
        hooks.dev_metric = [&](SeqCopyModel& m) {
            DecodeOptions opts;
            opts.max_steps = args.dev_decode_steps;
            opts.max_copy_len = args.cfg.max_copy_len;
            double sum = 0.0;
            for (const auto& pair : dev_pairs) {
                const auto src_ids = src_vocab.to_ids(pair.source);
                const auto map = map_src_to_tgt(pair.source, tgt_vocab);
                const Hypothesis hyp = greedy_decode(m, src_ids, map, opts);
                const auto out = replace_unk(hyp, pair.source, tgt_vocab);
                sum += rouge_n(out, pair.target, 2).f1;
            }
            return sum / static_cast<double>(dev_pairs.size());
        };
    } else if (args.dev_metric != "loss") {
        throw InvalidArgument("dev metric must be 'loss' or 'rouge2'");
    }

    struct Tee : std::ostream, std::streambuf {
        std::ostream &a, &b;
        Tee(std::ostream& a_, std::ostream& b_) : std::ostream(this), a(a_), b(b_) {}
        int overflow(int c) override {
            a.put(static_cast<char>(c));
            b.put(static_cast<char>(c));
            return c;
        }
    } tee(log_file, std::cout);

    train(model, args.cfg, train_set, dev_set, hooks, &tee);
    save_model(model, args.ckpt_dir + "/model.bin");
    return 0;
}

// -------------------------------------------------------------------- decode

struct DecodeArgs {
    std::string checkpoint, src_vocab_path, tgt_vocab_path, input, output;
    std::string trace_path;
    int beam = 8;
    int max_steps = 100;
};

int run_decode(const DecodeArgs& args) {
    const auto model = load_model(args.checkpoint);
    const Vocabulary src_vocab = Vocabulary::load(args.src_vocab_path);
    const Vocabulary tgt_vocab = Vocabulary::load(args.tgt_vocab_path);
    if (src_vocab.size() != model->dims().src_vocab ||
        tgt_vocab.size() != model->dims().tgt_vocab)
        throw IncompatibilityError("vocabulary sizes do not match the checkpoint");

    std::ifstream in(args.input, std::ios::binary);
    if (!in) throw Error("cannot open input file: " + args.input);
    std::ofstream out(args.output, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + args.output);
    std::ofstream trace;
    if (!args.trace_path.empty()) {
        trace.open(args.trace_path, std::ios::binary);
        if (!trace) throw Error("cannot open trace file: " + args.trace_path);
    }

    DecodeOptions opts;
    opts.beam_size = args.beam;
    opts.max_steps = args.max_steps;
    opts.max_copy_len = model->dims().max_copy_len;

    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        const auto tokens = split_tokens(tab == std::string::npos ? line : line.substr(0, tab));
        if (tokens.empty()) throw EmptyInput("decode input contains an empty line");

        const auto src_ids = src_vocab.to_ids(tokens);
        const auto map = map_src_to_tgt(tokens, tgt_vocab);
        const Hypothesis hyp = args.beam <= 1 ? greedy_decode(*model, src_ids, map, opts)
                                              : beam_decode(*model, src_ids, map, opts).best;

        const auto surface = replace_unk(hyp, tokens, tgt_vocab);
        for (std::size_t i = 0; i < surface.size(); ++i) out << (i ? " " : "") << surface[i];
        out << '\n';
        if (trace.is_open()) trace << trace_line(hyp, tokens, tgt_vocab) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
    std::string candidates, references, output;
};

std::vector<Tokens> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::vector<Tokens> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(split_tokens(line));
    return lines;
}

int run_eval(const EvalArgs& args) {
    const auto cands = read_lines(args.candidates);
    const auto refs = read_lines(args.references);
    if (cands.size() != refs.size())
        throw InvalidArgument("candidate and reference files differ in line count");
    if (cands.empty()) throw EmptyInput("no candidate lines to score");

    // macro-averaged corpus scores
    PrfScore r1{}, r2{}, rl{};
    for (std::size_t i = 0; i < cands.size(); ++i) {
        auto add = [](PrfScore& acc, const PrfScore& s) {
            acc.precision += s.precision;
            acc.recall += s.recall;
            acc.f1 += s.f1;
        };
        add(r1, rouge_n(cands[i], refs[i], 1));
        add(r2, rouge_n(cands[i], refs[i], 2));
        add(rl, rouge_l(cands[i], refs[i]));
    }
    const double n = static_cast<double>(cands.size());
    const double bleu = bleu4(cands, refs);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!args.output.empty()) {
        file.open(args.output, std::ios::binary);
        if (!file) throw Error("cannot open output file: " + args.output);
        os = &file;
    }
    auto line = [&](const char* name, const PrfScore& s) {
        (*os) << name << '\t' << s.precision / n << '\t' << s.recall / n << '\t' << s.f1 / n
              << '\n';
    };
    line("rouge_1", r1);
    line("rouge_2", r2);
    line("rouge_l", rl);
    (*os) << "bleu_4\t" << bleu << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequence-to-sequence summarizer whose decoder copies multi-token source spans"};
    // command-line flags override config-file values: the file expands first
    // and every option takes its last occurrence
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    std::string config_doc;  // consumed before parsing; registered for --help only
    const char* config_help = "key=value option file ('#' comments); flags override file values";

    PreprocessArgs pre_args;
    auto* pre = app.add_subcommand("preprocess",
                                   "build vocabularies, span annotations and corpus statistics");
    pre->add_option("--config", config_doc, config_help);
    pre->add_option("--train", pre_args.train_path, "training corpus, source<TAB>target per line")
        ->required();
    pre->add_option("--out-dir", pre_args.out_dir, "output directory (default: .)");
    pre->add_option("--min-count", pre_args.min_count,
                    "keep tokens appearing at least this often (default: 20)");
    pre->add_option("--max-copy-len", pre_args.max_copy_len,
                    "maximum copied span length (default: 5)");

    TrainArgs train_args;
    auto* tr = app.add_subcommand("train", "train a model");
    tr->add_option("--config", config_doc, config_help);
    tr->add_option("--train", train_args.train_path, "training corpus")->required();
    tr->add_option("--dev", train_args.dev_path, "development corpus")->required();
    tr->add_option("--src-vocab", train_args.src_vocab_path, "source vocabulary file")->required();
    tr->add_option("--tgt-vocab", train_args.tgt_vocab_path, "target vocabulary file")->required();
    tr->add_option("--ckpt-dir", train_args.ckpt_dir,
                   "checkpoint directory (default: checkpoints)");
    tr->add_option("--emb-size", train_args.emb_size, "word embedding size (default: 300)");
    tr->add_option("--hidden", train_args.hidden, "GRU hidden state size (default: 512)");
    tr->add_option("--batch-size", train_args.cfg.batch_size, "mini-batch size (default: 64)");
    tr->add_option("--lr", train_args.cfg.lr, "Adam learning rate (default: 0.001)");
    tr->add_option("--clip", train_args.cfg.clip,
                   "element-wise gradient clip bound (default: 5)");
    tr->add_option("--dropout", train_args.cfg.dropout, "dropout probability (default: 0.4)");
    tr->add_option("--eval-every", train_args.cfg.eval_every,
                   "batches between dev evaluations (default: 2000)");
    tr->add_option("--decay-patience", train_args.cfg.decay_patience,
                   "non-improving evaluations before halving the learning rate (default: 6)");
    tr->add_option("--max-copy-len", train_args.cfg.max_copy_len,
                   "maximum copied span length (default: 5)");
    tr->add_option("--seed", train_args.cfg.seed, "random seed (default: 1)");
    tr->add_option("--max-batches", train_args.cfg.max_batches, "training length in batches")
        ->required();
    tr->add_option("--dev-metric", train_args.dev_metric,
                   "dev selection metric: loss or rouge2 (default: loss)");
    tr->add_option("--dev-decode-steps", train_args.dev_decode_steps,
                   "decode budget for the rouge2 dev metric (default: 60)");
    tr->add_flag("--no-shuffle", [&](std::int64_t) { train_args.cfg.shuffle = false; },
                 "keep the corpus order instead of shuffling per epoch");

    DecodeArgs dec_args;
    auto* dec = app.add_subcommand("decode", "decode source sentences with a trained model");
    dec->add_option("--config", config_doc, config_help);
    dec->add_option("--checkpoint", dec_args.checkpoint, "model checkpoint")->required();
    dec->add_option("--src-vocab", dec_args.src_vocab_path, "source vocabulary file")->required();
    dec->add_option("--tgt-vocab", dec_args.tgt_vocab_path, "target vocabulary file")->required();
    dec->add_option("--input", dec_args.input,
                    "input file, one source per line (text before any tab)")
        ->required();
    dec->add_option("--output", dec_args.output, "output file, one decode per line")->required();
    dec->add_option("--beam", dec_args.beam, "beam size; 1 decodes greedily (default: 8)");
    dec->add_option("--max-steps", dec_args.max_steps,
                    "maximum decode actions per sentence (default: 100)");
    dec->add_option("--trace", dec_args.trace_path,
                    "also write decodes with copied spans bracketed");

    EvalArgs eval_args;
    auto* ev = app.add_subcommand("eval", "score decodes against references");
    ev->add_option("--config", config_doc, config_help);
    ev->add_option("--candidates", eval_args.candidates, "decoded output, one per line")
        ->required();
    ev->add_option("--references", eval_args.references, "references, one per line")->required();
    ev->add_option("--output", eval_args.output, "report file (default: stdout)");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::reverse(args.begin(), args.end());  // CLI11 takes reversed argument lists
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (pre->parsed()) return run_preprocess(pre_args);
        if (tr->parsed()) return run_train(train_args);
        if (dec->parsed()) return run_decode(dec_args);
        if (ev->parsed()) return run_eval(eval_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
