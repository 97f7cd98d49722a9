#include "checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace autotuner {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'A', 'T', 'C', 'K'};
constexpr uint32_t kFormatVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        raise(ErrorKind::Corrupt, "checkpoint truncated in header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
}

void write_floats(std::ostream& out, const float* data, size_t n) {
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(n * 4));
}

void read_floats(std::istream& in, float* data, size_t n) {
    if (!in.read(reinterpret_cast<char*>(data),
                 static_cast<std::streamsize>(n * 4)))
        raise(ErrorKind::Corrupt, "checkpoint truncated in payload");
}

json spec_row(const ConvSpec& s) {
    return json::array({s.in_c, s.out_c, s.kf, s.kt, s.sf, s.st, s.pf, s.pt});
}

}  // namespace

void save_checkpoint(const AutotunerNet<float>& net, const AdamState* adam,
                     const std::string& path) {
    json header;
    header["format_version"] = kFormatVersion;
    json specs = json::array();
    for (const ConvSpec& s : net.specs) specs.push_back(spec_row(s));
    header["conv_specs"] = specs;
    header["gru"] = {{"input", net.gru.input()}, {"hidden", net.gru.hidden()}};
    json tensors = json::array();
    const std::vector<std::string> names = parameter_names();
    const auto params = net.parameters();
    for (size_t i = 0; i < params.size(); ++i)
        tensors.push_back({{"name", names[i]}, {"shape", params[i]->shape}});
    header["tensors"] = tensors;
    if (adam) {
        header["adam"] = {{"step", adam->step},
                          {"lr", adam->hyper.lr},
                          {"beta1", adam->hyper.beta1},
                          {"beta2", adam->hyper.beta2},
                          {"eps", adam->hyper.eps}};
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot open checkpoint for writing: " + path);
    out.write(kMagic, 4);
    put_u32(out, kFormatVersion);
    const std::string head = header.dump();
    put_u32(out, static_cast<uint32_t>(head.size()));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const TensorF* t : params) write_floats(out, t->ptr(), t->data.size());
    if (adam) {
        write_floats(out, adam->m.data(), adam->m.size());
        write_floats(out, adam->v.data(), adam->v.size());
    }
    out.flush();
    if (!out) raise(ErrorKind::Io, "failed writing checkpoint: " + path);
}

bool load_checkpoint(const std::string& path, AutotunerNet<float>& net,
                     AdamState* adam) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open checkpoint: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        raise(ErrorKind::Checkpoint, "not a checkpoint file: " + path);
    const uint32_t version = get_u32(in);
    if (version != kFormatVersion)
        raise(ErrorKind::Checkpoint,
              "unsupported checkpoint version " + std::to_string(version));
    const uint32_t head_len = get_u32(in);
    std::string head(head_len, '\0');
    if (!in.read(head.data(), head_len))
        raise(ErrorKind::Corrupt, "checkpoint truncated in header");
    json header = json::parse(head, nullptr, false);
    if (header.is_discarded())
        raise(ErrorKind::Corrupt, "checkpoint header is not valid JSON");

    AutotunerNet<float> loaded = make_net<float>();
    json specs = json::array();
    for (const ConvSpec& s : loaded.specs) specs.push_back(spec_row(s));
    if (header.value("conv_specs", json()) != specs ||
        header.value("gru", json()) !=
            json({{"input", loaded.gru.input()}, {"hidden", loaded.gru.hidden()}}))
        raise(ErrorKind::Checkpoint, "checkpoint layer specs are incompatible");

    const std::vector<std::string> names = parameter_names();
    const auto params = loaded.parameters();
    const json& tensors = header.at("tensors");
    if (!tensors.is_array() || tensors.size() != params.size())
        raise(ErrorKind::Checkpoint, "checkpoint tensor list is incompatible");
    for (size_t i = 0; i < params.size(); ++i) {
        const json& t = tensors[i];
        if (t.value("name", "") != names[i] ||
            t.value("shape", std::vector<int64_t>{}) != params[i]->shape)
            raise(ErrorKind::Checkpoint,
                  "checkpoint tensor " + names[i] + " is incompatible");
    }
    for (TensorF* t : params) read_floats(in, t->ptr(), t->data.size());

    bool adam_loaded = false;
    AdamState st;
    if (header.contains("adam")) {
        const json& a = header["adam"];
        st.hyper.lr = a.value("lr", st.hyper.lr);
        st.hyper.beta1 = a.value("beta1", st.hyper.beta1);
        st.hyper.beta2 = a.value("beta2", st.hyper.beta2);
        st.hyper.eps = a.value("eps", st.hyper.eps);
        st.step = a.value("step", int64_t{0});
        const size_t n = static_cast<size_t>(loaded.parameter_count());
        st.m.resize(n);
        st.v.resize(n);
        read_floats(in, st.m.data(), n);
        read_floats(in, st.v.data(), n);
        adam_loaded = true;
    }

    net = std::move(loaded);
    if (adam) {
        if (adam_loaded)
            *adam = std::move(st);
        else
            *adam = make_adam_state(net);
    }
    return adam_loaded && adam != nullptr;
}

}  // namespace autotuner
