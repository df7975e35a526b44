#include "hjm/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hjm {

GridAxis make_axis(double min, double max, int n, bool periodic) {
    if (!(max > min)) throw ConfigError("axis needs max > min");
    if (n < 3) throw ConfigError("axis needs at least three nodes");
    return GridAxis{min, max, n, periodic};
}

long Grid::size() const {
    long s = 1;
    for (const auto& a : axes) s *= a.n;
    return s;
}

long Grid::flat_index(const std::vector<int>& multi) const {
    if (static_cast<int>(multi.size()) != dim())
        throw ConfigError("index rank does not match the grid");
    long f = 0;
    for (int i = 0; i < dim(); ++i) {
        if (multi[i] < 0 || multi[i] >= axes[i].n) throw OutOfGrid("node index out of range");
        f = f * axes[i].n + multi[i];
    }
    return f;
}

std::vector<int> Grid::multi_index(long flat) const {
    if (flat < 0 || flat >= size()) throw OutOfGrid("node index out of range");
    std::vector<int> m(dim());
    for (int i = dim() - 1; i >= 0; --i) {
        m[i] = static_cast<int>(flat % axes[i].n);
        flat /= axes[i].n;
    }
    return m;
}

Vec Grid::point(const std::vector<int>& multi) const {
    if (static_cast<int>(multi.size()) != dim())
        throw ConfigError("index rank does not match the grid");
    Vec q(dim());
    for (int i = 0; i < dim(); ++i) q[i] = axes[i].min + multi[i] * axes[i].dx();
    return q;
}

GridFunction::GridFunction(Grid grid) : grid_(std::move(grid)) {
    if (grid_.dim() == 0) throw ConfigError("grid needs at least one axis");
    values_ = Eigen::VectorXd::Zero(grid_.size());
}

void GridFunction::fill(const std::function<double(const Vec&)>& f) {
    for (long i = 0; i < grid_.size(); ++i) values_[i] = f(grid_.point(grid_.multi_index(i)));
}

double GridFunction::interpolate(const Vec& q) const {
    const int d = grid_.dim();
    if (q.size() != d) throw ConfigError("query rank does not match the grid");

    std::vector<int> lo(d), hi(d);
    std::vector<double> w(d);
    for (int i = 0; i < d; ++i) {
        const auto& a = grid_.axes[i];
        const double dx = a.dx();
        double s;
        if (a.periodic) {
            const double P = a.period();
            double x = std::fmod(q[i] - a.min, P);
            if (x < 0) x += P;
            s = x / dx;
            int j = static_cast<int>(std::floor(s));
            if (j >= a.n) j = 0;
            lo[i] = j;
            hi[i] = (j + 1) % a.n;
            w[i] = s - j;
        } else {
            const double slack = 1e-9 * (1.0 + a.max - a.min);
            if (q[i] < a.min - slack || q[i] > a.max + slack)
                throw OutOfGrid("query beyond a bounded axis");
            const double x = std::min(std::max(q[i], a.min), a.max);
            s = (x - a.min) / dx;
            int j = std::min(static_cast<int>(std::floor(s)), a.n - 2);
            lo[i] = j;
            hi[i] = j + 1;
            w[i] = std::min(std::max(s - j, 0.0), 1.0);
        }
    }

    double acc = 0;
    std::vector<int> corner(d);
    for (int mask = 0; mask < (1 << d); ++mask) {
        double weight = 1;
        for (int i = 0; i < d; ++i) {
            const bool up = mask & (1 << i);
            corner[i] = up ? hi[i] : lo[i];
            weight *= up ? w[i] : (1.0 - w[i]);
        }
        if (weight != 0.0) acc += weight * values_[grid_.flat_index(corner)];
    }
    return acc;
}

namespace {

constexpr char kMagic[8] = {'H', 'J', 'G', 'R', 'I', 'D', 'F', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ConfigError("truncated grid file");
    return v;
}

}  // namespace

void write_grid_binary(const std::string& path, const GridFunction& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.write(kMagic, 8);
    put(out, kVersion);
    put(out, static_cast<std::uint32_t>(f.grid().dim()));
    for (const auto& a : f.grid().axes) {
        put(out, a.min);
        put(out, a.max);
        put(out, static_cast<std::uint32_t>(a.n));
        put(out, static_cast<std::uint32_t>(a.periodic ? 1 : 0));
    }
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(sizeof(double) * f.values().size()));
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

GridFunction read_grid_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError("'" + path + "' is not a grid file");
    if (get<std::uint32_t>(in) != kVersion) throw ConfigError("unsupported grid file version");
    const auto dim = get<std::uint32_t>(in);
    if (dim == 0 || dim > 16) throw ConfigError("grid file has an implausible rank");
    Grid g;
    for (std::uint32_t i = 0; i < dim; ++i) {
        const double mn = get<double>(in);
        const double mx = get<double>(in);
        const auto n = get<std::uint32_t>(in);
        const auto per = get<std::uint32_t>(in);
        g.axes.push_back(make_axis(mn, mx, static_cast<int>(n), per != 0));
    }
    GridFunction f(g);
    in.read(reinterpret_cast<char*>(f.values().data()),
            static_cast<std::streamsize>(sizeof(double) * f.values().size()));
    if (!in) throw ConfigError("truncated grid file");
    return f;
}

void write_grid_csv(std::ostream& out, const GridFunction& f) {
    const auto& g = f.grid();
    out << std::setprecision(17);
    for (int i = 0; i < g.dim(); ++i) {
        const auto& a = g.axes[i];
        out << "# axis " << i << ": min=" << a.min << " max=" << a.max << " n=" << a.n
            << " periodic=" << (a.periodic ? 1 : 0) << "\n";
    }
    for (int i = 0; i < g.dim(); ++i) out << "q" << i << ",";
    out << "value\n";
    for (long idx = 0; idx < g.size(); ++idx) {
        const Vec q = g.point(g.multi_index(idx));
        for (int i = 0; i < g.dim(); ++i) out << q[i] << ",";
        out << f.values()[idx] << "\n";
    }
}

void write_grid_csv(const std::string& path, const GridFunction& f) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    write_grid_csv(out, f);
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace hjm
