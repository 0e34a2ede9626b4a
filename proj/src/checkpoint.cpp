#include "grokinfo/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace grokinfo {

namespace {

constexpr int kSchemaVersion = 1;

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
    auto p = stem;
    p += ext;
    return p;
}

void put_f64(std::ofstream& out, double value) {
    auto bits = std::bit_cast<std::uint64_t>(value);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_f64(std::ifstream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("checkpoint: truncated sidecar");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

// Arrays are written column-major, in the order listed in the header.
template <class Tensor>
void write_tensor(std::ofstream& out, const Tensor& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) put_f64(out, t.data()[i]);
}

template <class Tensor>
void read_tensor(std::ifstream& in, Tensor& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = get_f64(in);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt) {
    const auto& p = ckpt.params;
    p.check_shapes();
    nlohmann::json header;
    header["schema_version"] = kSchemaVersion;
    header["epoch"] = ckpt.meta.epoch;
    header["split_seed"] = ckpt.meta.split_seed;
    header["init_seed"] = ckpt.meta.init_seed;
    header["config_hash"] = ckpt.meta.config_hash;
    header["n_hidden"] = p.n_hidden();
    header["n_inputs"] = p.n_inputs();
    header["n_classes"] = p.n_classes();
    header["layout"] = "column-major little-endian float64";
    std::vector<std::string> arrays{"w1", "b1", "w2"};
    if (ckpt.optimizer) {
        header["adam_t"] = ckpt.optimizer->t;
        for (const char* a : {"m.w1", "m.b1", "m.w2", "v.w1", "v.b1", "v.w2"}) arrays.emplace_back(a);
    }
    header["arrays"] = arrays;
    header["sidecar"] = with_ext(stem, ".bin").filename().string();

    std::ofstream bin(with_ext(stem, ".bin"), std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint: cannot write " + with_ext(stem, ".bin").string());
    write_tensor(bin, p.w1);
    write_tensor(bin, p.b1);
    write_tensor(bin, p.w2);
    if (ckpt.optimizer) {
        for (const MlpParams* t : {&ckpt.optimizer->m, &ckpt.optimizer->v}) {
            write_tensor(bin, t->w1);
            write_tensor(bin, t->b1);
            write_tensor(bin, t->w2);
        }
    }
    std::ofstream js(with_ext(stem, ".json"));
    if (!js) throw std::runtime_error("checkpoint: cannot write header");
    js << header.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& stem) {
    std::ifstream js(with_ext(stem, ".json"));
    if (!js) throw std::runtime_error("checkpoint: missing header " + with_ext(stem, ".json").string());
    const auto header = nlohmann::json::parse(js);
    if (header.at("schema_version").get<int>() != kSchemaVersion)
        throw std::runtime_error("checkpoint: unsupported schema_version");

    Checkpoint ckpt;
    ckpt.meta.epoch = header.at("epoch").get<long long>();
    ckpt.meta.split_seed = header.at("split_seed").get<std::uint64_t>();
    ckpt.meta.init_seed = header.at("init_seed").get<std::uint64_t>();
    ckpt.meta.config_hash = header.at("config_hash").get<std::string>();
    const int n = header.at("n_hidden").get<int>();
    const int in = header.at("n_inputs").get<int>();
    const int k = header.at("n_classes").get<int>();

    auto shaped = [&] {
        MlpParams t;
        t.w1.resize(n, in);
        t.b1.resize(n);
        t.w2.resize(k, n);
        return t;
    };
    std::ifstream bin(with_ext(stem, ".bin"), std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint: missing sidecar");
    ckpt.params = shaped();
    read_tensor(bin, ckpt.params.w1);
    read_tensor(bin, ckpt.params.b1);
    read_tensor(bin, ckpt.params.w2);
    if (header.contains("adam_t")) {
        AdamWState st{shaped(), shaped(), header.at("adam_t").get<long long>()};
        for (MlpParams* t : {&st.m, &st.v}) {
            read_tensor(bin, t->w1);
            read_tensor(bin, t->b1);
            read_tensor(bin, t->w2);
        }
        ckpt.optimizer = std::move(st);
    }
    return ckpt;
}

}  // namespace grokinfo
