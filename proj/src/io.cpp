#include "plate/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace plate {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void prepare_output_dir(const std::string& dir, bool overwrite) {
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec)) throw ConfigError({"output path exists and is not a directory: " + dir});
        if (!fs::is_empty(dir, ec) && !overwrite)
            throw ConfigError({"output directory " + dir + " is not empty; pass --overwrite to reuse it"});
        return;
    }
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError({"cannot create output directory " + dir + ": " + ec.message()});
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger, const std::string& config_hash) {
    std::ostringstream os;
    os << "# config_hash=" << config_hash << "\n";
    os << "t,kinetic,bending,Pi,Pi0,Pi1,E,Etot,damping_integral,flux_integral,identity_residual\n";
    for (const LedgerRow& r : ledger) {
        os << fmt17(r.t) << ',' << fmt17(r.e.kinetic) << ',' << fmt17(r.e.bending) << ',' << fmt17(r.e.Pi) << ','
           << fmt17(r.e.Pi0) << ',' << fmt17(r.e.Pi1) << ',' << fmt17(r.e.E) << ',' << fmt17(r.e.Etot) << ','
           << fmt17(r.damping_integral) << ',' << fmt17(r.flux_integral) << ',' << fmt17(r.identity_residual)
           << '\n';
    }
    write_text(path, os.str());
}

namespace {

constexpr char kMagic[8] = {'P', 'L', 'T', 'S', 'N', 'A', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("snapshot file truncated");
    return v;
}

}  // namespace

void write_snapshots(const std::string& path, const Trajectory& tr, std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, config_hash);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tr.Mx));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tr.Ny));
    put<double>(out, tr.plan.dt);
    put<std::uint64_t>(out, tr.snapshots.size());
    for (const State& s : tr.snapshots) {
        put<double>(out, s.t);
        out.write(reinterpret_cast<const char*>(s.u.data()), s.u.size() * sizeof(double));
        out.write(reinterpret_cast<const char*>(s.v.data()), s.v.size() * sizeof(double));
    }
}

SnapshotFile read_snapshots(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("not a snapshot file: " + path);
    SnapshotFile f;
    f.version = take<std::uint32_t>(in);
    if (f.version != kVersion) throw std::runtime_error("unsupported snapshot version");
    f.config_hash = take<std::uint64_t>(in);
    f.Mx = static_cast<int>(take<std::uint32_t>(in));
    f.Ny = static_cast<int>(take<std::uint32_t>(in));
    f.dt = take<double>(in);
    const auto count = take<std::uint64_t>(in);
    const int n = f.Mx * f.Ny;
    for (std::uint64_t i = 0; i < count; ++i) {
        State s;
        s.t = take<double>(in);
        s.u.resize(n);
        s.v.resize(n);
        in.read(reinterpret_cast<char*>(s.u.data()), n * sizeof(double));
        in.read(reinterpret_cast<char*>(s.v.data()), n * sizeof(double));
        if (!in) throw std::runtime_error("snapshot file truncated");
        f.snapshots.push_back(std::move(s));
    }
    return f;
}

void write_svg(const std::string& path, const std::string& title, const std::vector<double>& x,
               const std::vector<SvgSeries>& series, bool log_y) {
    const double W = 720, H = 420, L = 70, R = 20, Tm = 40, B = 50;
    auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
    double x0 = x.empty() ? 0 : x.front(), x1 = x.empty() ? 1 : x.back();
    double y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (double v : s.y)
            if (std::isfinite(ty(v))) y0 = std::min(y0, ty(v)), y1 = std::max(y1, ty(v));
    if (!(y1 > y0)) y0 -= 1, y1 += 1;
    if (!(x1 > x0)) x1 = x0 + 1;
    auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - Tm - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << fmt17(x0) << "</text>\n";
    os << "<text x=\"" << W - R - 60 << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << fmt17(x1) << "</text>\n";
    os << "<text x=\"4\" y=\"" << Tm + 10 << "\" font-size=\"11\">" << (log_y ? "1e" : "") << y1 << "</text>\n";
    os << "<text x=\"4\" y=\"" << H - B << "\" font-size=\"11\">" << (log_y ? "1e" : "") << y0 << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        os << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < std::min(x.size(), s.y.size()); ++i)
            if (std::isfinite(ty(s.y[i]))) os << px(x[i]) << ',' << py(s.y[i]) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << W - R - 150 << "\" y=\"" << Tm + 16 + 14 * k << "\" font-size=\"11\" fill=\""
           << colors[k % 6] << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
    write_text(path, os.str());
}

}  // namespace plate
