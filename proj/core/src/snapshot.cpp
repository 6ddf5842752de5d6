#include "lamelab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lamelab {

namespace {

template <class U>
void put_le(std::string& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <class U>
U get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(U) > in.size()) throw IoError("snapshot: truncated input");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        v |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(U);
    return v;
}

void put_field(std::string& out, const ScalarField& f) {
    for (double x : f.values()) put_le(out, std::bit_cast<std::uint64_t>(x));
}

ScalarField get_field(const std::string& in, std::size_t& pos, const GridSpec& g) {
    std::vector<double> v(g.size());
    for (auto& x : v) x = std::bit_cast<double>(get_le<std::uint64_t>(in, pos));
    return ScalarField(g, std::move(v));
}

} // namespace

std::vector<std::string> snapshot_field_names(int dim) {
    std::vector<std::string> names;
    for (int i = 0; i < dim; ++i) names.push_back("u_" + std::to_string(i));
    for (int i = 0; i < dim; ++i) names.push_back("v_" + std::to_string(i));
    names.emplace_back("theta");
    return names;
}

std::string encode_snapshot(const State& s) {
    const GridSpec& g = s.grid();
    nlohmann::ordered_json h;
    h["dim"] = g.dim();
    std::vector<double> lengths;
    std::vector<int> counts;
    for (int a = 0; a < g.dim(); ++a) {
        lengths.push_back(g.length(a));
        counts.push_back(g.count(a));
    }
    h["lengths"] = lengths;
    h["interior_counts"] = counts;
    h["field_names"] = snapshot_field_names(g.dim());
    h["time"] = s.t;
    const std::string header = h.dump();

    std::string out = "LTHS";
    put_le<std::uint32_t>(out, snapshot_version);
    put_le<std::uint64_t>(out, header.size());
    out += header;
    for (int i = 0; i < g.dim(); ++i) put_field(out, s.u[i]);
    for (int i = 0; i < g.dim(); ++i) put_field(out, s.v[i]);
    put_field(out, s.theta);
    return out;
}

State decode_snapshot(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 4, "LTHS") != 0)
        throw IoError("snapshot: bad magic");
    std::size_t pos = 4;
    const auto version = get_le<std::uint32_t>(bytes, pos);
    if (version != snapshot_version)
        throw IoError("snapshot: unsupported version " + std::to_string(version));
    const auto hlen = get_le<std::uint64_t>(bytes, pos);
    if (pos + hlen > bytes.size()) throw IoError("snapshot: truncated header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(pos, hlen));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("snapshot: malformed header: ") + e.what());
    }
    pos += hlen;
    const int dim = h.at("dim").get<int>();
    const auto lengths = h.at("lengths").get<std::vector<double>>();
    const auto counts = h.at("interior_counts").get<std::vector<int>>();
    if (static_cast<int>(lengths.size()) != dim || static_cast<int>(counts.size()) != dim)
        throw IoError("snapshot: header dimension mismatch");
    if (h.at("field_names").get<std::vector<std::string>>() != snapshot_field_names(dim))
        throw IoError("snapshot: unexpected field list");
    GridSpec g(lengths, counts);
    State s = State::zero(g, h.at("time").get<double>());
    for (int i = 0; i < dim; ++i) s.u[i] = get_field(bytes, pos, g);
    for (int i = 0; i < dim; ++i) s.v[i] = get_field(bytes, pos, g);
    s.theta = get_field(bytes, pos, g);
    if (pos != bytes.size()) throw IoError("snapshot: trailing bytes");
    return s;
}

void write_snapshot(const std::filesystem::path& path, const State& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    const std::string bytes = encode_snapshot(s);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

State read_snapshot(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return decode_snapshot(ss.str());
}

} // namespace lamelab
