#include <gtest/gtest.h>

#include <sstream>

#include "bogolyubov/ensemble_io.hpp"
#include "bogolyubov/errors.hpp"

using namespace bogolyubov;

namespace {

PathEnsemble sample_ensemble() {
    PathEnsemble e;
    e.times = {0.0, 0.1, 0.2};
    e.n_paths = 2;
    e.dim = 2;
    e.seed = 123456789012345ull;
    e.values.resize(e.n_paths * e.times.size() * 2);
    for (std::size_t i = 0; i < e.values.size(); ++i) e.values[i] = 0.1 * static_cast<double>(i) - 1.0 / 3.0;
    return e;
}

}  // namespace

TEST(EnsembleCsv, HeaderAndRows) {
    std::ostringstream os;
    write_csv(sample_ensemble(), os);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "path_id,t,x_1,x_2");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 6);
    EXPECT_NE(os.str().find("-0.33333333333333331"), std::string::npos);
}

TEST(EnsembleBinary, RoundTripIsExact) {
    const auto e = sample_ensemble();
    std::stringstream buf;
    write_binary(e, buf);
    const auto r = read_binary(buf);
    EXPECT_EQ(r.times, e.times);
    EXPECT_EQ(r.values, e.values);
    EXPECT_EQ(r.n_paths, e.n_paths);
    EXPECT_EQ(r.dim, e.dim);
    EXPECT_EQ(r.seed, e.seed);
}

TEST(EnsembleBinary, RejectsCorruptInput) {
    std::stringstream bad("NOTBGL");
    EXPECT_THROW(read_binary(bad), InvalidArgument);
    std::stringstream buf;
    write_binary(sample_ensemble(), buf);
    std::string s = buf.str();
    std::stringstream truncated(s.substr(0, s.size() - 5));
    EXPECT_THROW(read_binary(truncated), InvalidArgument);
}
