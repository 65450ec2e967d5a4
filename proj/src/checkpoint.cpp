#include "mhdeep/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mhdeep/errors.hpp"

namespace mhdeep::io {

namespace {

constexpr char kMagic[] = "mhdeep-checkpoint v1";

void put_real(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void put_matrix(std::string& out, const char* tag, const Eigen::MatrixXd& m) {
    out += tag;
    out += ' ';
    out += std::to_string(m.rows());
    out += ' ';
    out += std::to_string(m.cols());
    out += '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) out += ' ';
            put_real(out, m(r, c));
        }
        out += '\n';
    }
}

Eigen::MatrixXd get_matrix(std::istream& in, const std::string& expected_tag) {
    std::string tag;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> tag >> rows >> cols) || tag != expected_tag) {
        throw DataError("checkpoint: expected section '" + expected_tag + "', found '" + tag + "'");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(in >> m(r, c))) throw DataError("checkpoint: truncated section '" + expected_tag + "'");
        }
    }
    return m;
}

}  // namespace

std::string hash_hex(std::uint64_t hash) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
    return buf;
}

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
    std::string out;
    out.reserve(1 << 20);
    out += kMagic;
    out += '\n';
    out += "config_hash " + hash_hex(model.config_hash) + '\n';
    out += "seed " + std::to_string(model.seed) + '\n';
    out += "task " + std::string(task_name(model.task)) + '\n';
    out += "partition " + std::to_string(model.partition_index) + '\n';
    out += "categories " + std::to_string(model.categories.bits()) + '\n';
    out += "layer_sizes " + std::to_string(model.net.sizes.size());
    for (int s : model.net.sizes) out += ' ' + std::to_string(s);
    out += '\n';

    put_matrix(out, "norm_mean", model.stats.mean.transpose());
    put_matrix(out, "norm_std", model.stats.stdev.transpose());
    out += "norm_degenerate " + std::to_string(model.stats.degenerate.size()) + '\n';
    for (std::size_t i = 0; i < model.stats.degenerate.size(); ++i) {
        if (i > 0) out += ' ';
        out += model.stats.degenerate[i] ? '1' : '0';
    }
    out += '\n';

    for (std::size_t l = 0; l < model.net.layers.size(); ++l) {
        const auto& layer = model.net.layers[l];
        const std::string idx = std::to_string(l);
        put_matrix(out, ("weights" + idx).c_str(), layer.weights);
        put_matrix(out, ("bias" + idx).c_str(), layer.bias.transpose());
        put_matrix(out, ("mask" + idx).c_str(), layer.mask);
    }
    out += "end\n";

    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot write checkpoint " + path.string());
    file << out;
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot read checkpoint " + path.string());

    std::string magic;
    std::getline(file, magic);
    if (magic != kMagic) {
        throw DataError("unsupported checkpoint format in " + path.string() + ": '" + magic + "'");
    }

    TrainedModel model;
    std::string key;

    file >> key;
    if (key != "config_hash") throw DataError("checkpoint: missing config_hash");
    std::string hash_text;
    file >> hash_text;
    model.config_hash = std::strtoull(hash_text.c_str(), nullptr, 16);

    file >> key >> model.seed;
    if (key != "seed") throw DataError("checkpoint: missing seed");

    std::string task_text;
    file >> key >> task_text;
    if (key != "task") throw DataError("checkpoint: missing task");
    const auto task = task_from_name(task_text);
    if (!task) throw DataError("checkpoint: unknown task '" + task_text + "'");
    model.task = *task;

    file >> key >> model.partition_index;
    if (key != "partition") throw DataError("checkpoint: missing partition");

    unsigned bits = 0;
    file >> key >> bits;
    if (key != "categories") throw DataError("checkpoint: missing categories");
    model.categories = CategorySet::from_bits(bits);

    std::size_t n_sizes = 0;
    file >> key >> n_sizes;
    if (key != "layer_sizes") throw DataError("checkpoint: missing layer_sizes");
    model.net.sizes.resize(n_sizes);
    for (auto& s : model.net.sizes) file >> s;

    model.stats.mean = get_matrix(file, "norm_mean").transpose();
    model.stats.stdev = get_matrix(file, "norm_std").transpose();
    std::size_t n_degenerate = 0;
    file >> key >> n_degenerate;
    if (key != "norm_degenerate") throw DataError("checkpoint: missing norm_degenerate");
    model.stats.degenerate.resize(n_degenerate);
    for (auto& d : model.stats.degenerate) {
        int v = 0;
        file >> v;
        d = static_cast<std::uint8_t>(v);
        if (d) ++model.stats.floored_features;
    }

    for (std::size_t l = 0; l + 1 < model.net.sizes.size(); ++l) {
        const std::string idx = std::to_string(l);
        nn::MaskedMlp<double>::Layer layer;
        layer.weights = get_matrix(file, "weights" + idx);
        layer.bias = get_matrix(file, "bias" + idx).transpose();
        layer.mask = get_matrix(file, "mask" + idx);
        if (layer.weights.rows() != model.net.sizes[l + 1] ||
            layer.weights.cols() != model.net.sizes[l]) {
            throw DataError("checkpoint: layer " + idx + " does not match layer_sizes");
        }
        model.net.layers.push_back(std::move(layer));
    }
    file >> key;
    if (key != "end") throw DataError("checkpoint: missing end marker");
    return model;
}

void write_instances(const InstanceSet& instances, const std::filesystem::path& path,
                     const std::vector<std::string>& provenance) {
    std::string out;
    out.reserve(1 << 20);
    for (const auto& line : provenance) {
        out += "# " + line + '\n';
    }
    out += "# columns participant_id,window_index,label,features[" +
           std::to_string(instances.dim()) + "]\n";
    for (Eigen::Index r = 0; r < instances.rows(); ++r) {
        out += instances.participants[static_cast<std::size_t>(r)];
        out += ',' + std::to_string(instances.window_indices[static_cast<std::size_t>(r)]);
        out += ',' + std::to_string(instances.labels(r));
        for (Eigen::Index c = 0; c < instances.dim(); ++c) {
            out += ',';
            put_real(out, instances.features(r, c));
        }
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot write instance file " + path.string());
    file << out;
}

InstanceSet read_instances(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot read instance file " + path.string());
    std::vector<DataInstance> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream row(line);
        DataInstance inst;
        std::string field;
        if (!std::getline(row, inst.participant_id, ',')) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
        }
        if (!std::getline(row, field, ',')) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": missing window index");
        }
        inst.window_index = std::stoi(field);
        if (!std::getline(row, field, ',')) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": missing label");
        }
        inst.label = std::stoi(field);
        std::vector<double> values;
        while (std::getline(row, field, ',')) {
            values.push_back(std::strtod(field.c_str(), nullptr));
        }
        inst.features = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        items.push_back(std::move(inst));
    }
    return InstanceSet::pack(items);
}

}  // namespace mhdeep::io
