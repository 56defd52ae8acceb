#include "seqcopy/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "seqcopy/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace seqcopy {

namespace {

constexpr const char* kMagic = "SEQCOPY1";

std::string shape_to_string(const Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(s[i]);
    }
    return out;
}

Shape parse_shape(const std::string& text, const std::string& tensor_name) {
    Shape shape;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        try {
            shape.push_back(std::stoi(text.substr(pos, next - pos)));
        } catch (const std::exception&) {
            throw FormatError("bad shape for tensor " + tensor_name);
        }
        pos = next + 1;
    }
    if (shape.empty()) throw FormatError("empty shape for tensor " + tensor_name);
    return shape;
}

int parse_int_value(const std::string& key, const std::string& value) {
    try {
        return std::stoi(value);
    } catch (const std::exception&) {
        throw FormatError("bad integer for checkpoint key " + key);
    }
}

}  // namespace

void save_checkpoint(const ParameterStore& store, const CheckpointHyper& hyper,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open checkpoint for writing: " + path);

    out << kMagic << '\n';
    out << "emb_size=" << hyper.emb_size << '\n';
    out << "hidden=" << hyper.hidden << '\n';
    out << "src_vocab=" << hyper.src_vocab << '\n';
    out << "tgt_vocab=" << hyper.tgt_vocab << '\n';
    out << "max_copy_len=" << hyper.max_copy_len << '\n';
    for (int i = 0; i < store.size(); ++i)
        out << store.name(i) << '\t' << shape_to_string(store.param(i).shape()) << "\tf32\n";
    out << '\n';

    std::vector<float> buf;
    for (int i = 0; i < store.size(); ++i) {
        const Tensor& t = store.param(i);
        buf.resize(static_cast<std::size_t>(t.size()));
        for (std::int64_t k = 0; k < t.size(); ++k) buf[k] = static_cast<float>(t[k]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!out) throw Error("checkpoint write failed: " + path);
}

std::pair<ParameterStore, CheckpointHyper> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path);

    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw FormatError("bad checkpoint magic in " + path);

    CheckpointHyper hyper;
    bool seen[5] = {false, false, false, false, false};
    struct Header {
        std::string name;
        Shape shape;
    };
    std::vector<Header> headers;

    while (std::getline(in, line)) {
        if (line.empty()) break;
        const auto tab = line.find('\t');
        if (tab != std::string::npos) {
            const auto tab2 = line.find('\t', tab + 1);
            if (tab2 == std::string::npos)
                throw FormatError("tensor header needs name, shape and dtype");
            const std::string name = line.substr(0, tab);
            const std::string dtype = line.substr(tab2 + 1);
            if (dtype != "f32") throw FormatError("unsupported dtype " + dtype + " for " + name);
            headers.push_back({name, parse_shape(line.substr(tab + 1, tab2 - tab - 1), name)});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("checkpoint line is neither key=value nor a tensor header: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "emb_size") { hyper.emb_size = parse_int_value(key, value); seen[0] = true; }
        else if (key == "hidden") { hyper.hidden = parse_int_value(key, value); seen[1] = true; }
        else if (key == "src_vocab") { hyper.src_vocab = parse_int_value(key, value); seen[2] = true; }
        else if (key == "tgt_vocab") { hyper.tgt_vocab = parse_int_value(key, value); seen[3] = true; }
        else if (key == "max_copy_len") { hyper.max_copy_len = parse_int_value(key, value); seen[4] = true; }
        else throw FormatError("unknown checkpoint key: " + key);
    }
    for (bool s : seen)
        if (!s) throw FormatError("checkpoint is missing a hyperparameter line");
    if (headers.empty()) throw FormatError("checkpoint declares no tensors");

    ParameterStore store;
    std::vector<float> buf;
    for (const Header& h : headers) {
        const std::int64_t count = Tensor::count(h.shape);
        buf.resize(static_cast<std::size_t>(count));
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
            throw CorruptionError("checkpoint data truncated in tensor " + h.name);
        Vec values(count);
        for (std::int64_t k = 0; k < count; ++k) values[k] = static_cast<double>(buf[k]);
        store.add(h.name, Tensor(h.shape, std::move(values)));
    }
    char extra;
    if (in.read(&extra, 1))
        throw CorruptionError("checkpoint has trailing bytes after the last tensor");
    return {std::move(store), hyper};
}

void save_model(const SeqCopyModel& model, const std::string& path) {
    const ModelDims& d = model.dims();
    CheckpointHyper hyper{d.emb_size, d.hidden, d.src_vocab, d.tgt_vocab, d.max_copy_len};
    save_checkpoint(model.store(), hyper, path);
}

std::unique_ptr<SeqCopyModel> load_model(const std::string& path) {
    auto [loaded, hyper] = load_checkpoint(path);

    ModelDims dims;
    dims.emb_size = hyper.emb_size;
    dims.hidden = hyper.hidden;
    dims.src_vocab = hyper.src_vocab;
    dims.tgt_vocab = hyper.tgt_vocab;
    dims.max_copy_len = hyper.max_copy_len;

    auto model = std::make_unique<SeqCopyModel>(dims);
    ParameterStore& store = model->store();
    if (store.size() != loaded.size())
        throw IncompatibilityError("checkpoint tensor count does not match the model");
    for (int i = 0; i < store.size(); ++i) {
        if (loaded.name(i) != store.name(i))
            throw IncompatibilityError("checkpoint tensor order mismatch at " + loaded.name(i));
        if (!loaded.param(i).same_shape(store.param(i)))
            throw IncompatibilityError("checkpoint shape mismatch for " + loaded.name(i));
        store.param(i) = loaded.param(i);
    }
    return model;
}

}  // namespace seqcopy
