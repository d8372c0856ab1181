#include "bogolyubov/ensemble_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "bogolyubov/errors.hpp"

namespace bogolyubov {

namespace {

constexpr std::array<char, 6> kMagic{'B', 'G', 'L', 'Y', 'B', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes;
    in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!in) throw InvalidArgument("binary ensemble: truncated input");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

void write_csv(const PathEnsemble& e, std::ostream& out) {
    out << "path_id,t";
    for (int i = 1; i <= e.dim; ++i) out << ",x_" << i;
    out << '\n' << std::setprecision(17);
    for (std::size_t p = 0; p < e.n_paths; ++p) {
        for (std::size_t k = 0; k < e.n_times(); ++k) {
            out << p << ',' << e.times[k];
            for (int i = 0; i < e.dim; ++i) out << ',' << e.at(p, k, i);
            out << '\n';
        }
    }
}

void write_csv(const PathEnsemble& e, const std::string& path) {
    auto out = open_out(path, std::ios::out);
    write_csv(e, out);
}

void write_binary(const PathEnsemble& e, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.dim));
    put_le<std::uint64_t>(out, e.n_paths);
    put_le<std::uint64_t>(out, e.n_times());
    put_le<std::uint64_t>(out, e.seed);
    for (std::size_t p = 0; p < e.n_paths; ++p) {
        for (std::size_t k = 0; k < e.n_times(); ++k) {
            put_le<double>(out, e.times[k]);
            for (int i = 0; i < e.dim; ++i) put_le<double>(out, e.at(p, k, i));
        }
    }
}

void write_binary(const PathEnsemble& e, const std::string& path) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    write_binary(e, out);
}

PathEnsemble read_binary(std::istream& in) {
    std::array<char, 6> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw InvalidArgument("binary ensemble: bad magic (expected BGLYB1)");
    PathEnsemble e;
    e.dim = static_cast<int>(get_le<std::uint32_t>(in));
    e.n_paths = get_le<std::uint64_t>(in);
    const auto n_times = get_le<std::uint64_t>(in);
    e.seed = get_le<std::uint64_t>(in);
    if (e.dim < 1 || e.dim > kMaxDimension) throw InvalidArgument("binary ensemble: bad dimension");
    e.times.resize(n_times);
    e.values.resize(e.n_paths * n_times * static_cast<std::size_t>(e.dim));
    for (std::size_t p = 0; p < e.n_paths; ++p) {
        for (std::size_t k = 0; k < n_times; ++k) {
            const double t = get_le<double>(in);
            if (p == 0) {
                e.times[k] = t;
            } else if (t != e.times[k]) {
                throw InvalidArgument("binary ensemble: paths disagree on the time grid");
            }
            for (int i = 0; i < e.dim; ++i) e.at(p, k, i) = get_le<double>(in);
        }
    }
    return e;
}

PathEnsemble read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    return read_binary(in);
}

}  // namespace bogolyubov
