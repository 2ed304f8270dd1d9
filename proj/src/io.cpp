#include "radiff/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace radiff {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

namespace {

void write_header(const std::string& path, const PeriodicGrid& g, int n_dirs, double time,
                  double epsilon) {
    std::ofstream hdr(path + ".hdr");
    if (!hdr) throw std::runtime_error("dump: cannot open " + path + ".hdr");
    hdr << "nx=" << g.n[0] << "\nny=" << g.n[1] << "\nnz=" << g.n[2] << "\n";
    hdr << "lx=" << format_g17(g.length[0]) << "\nly=" << format_g17(g.length[1])
        << "\nlz=" << format_g17(g.length[2]) << "\n";
    hdr << "n_dirs=" << n_dirs << "\n";
    hdr << "time=" << format_g17(time) << "\n";
    hdr << "epsilon=" << format_g17(epsilon) << "\n";
    if (!hdr) throw std::runtime_error("dump: header write failed for " + path);
}

void write_payload(const std::string& path, const std::vector<double>& v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump: cannot open " + path);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw std::runtime_error("dump: write failed for " + path);
}

struct Header {
    PeriodicGrid grid;
    int n_dirs = 0;
    double time = 0.0;
    double epsilon = 0.0;
};

Header read_header(const std::string& path) {
    std::ifstream hdr(path + ".hdr");
    if (!hdr) throw std::runtime_error("load: cannot open " + path + ".hdr");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(hdr, line)) {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
                s.erase(s.begin());
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            return s;
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    for (const char* key : {"nx", "ny", "nz", "lx", "ly", "lz", "n_dirs", "time", "epsilon"})
        if (!kv.count(key))
            throw std::runtime_error(std::string("load: header missing key ") + key);
    Header h;
    h.grid = PeriodicGrid::make(std::stoi(kv["nx"]), std::stoi(kv["ny"]), std::stoi(kv["nz"]),
                                std::stod(kv["lx"]), std::stod(kv["ly"]), std::stod(kv["lz"]));
    h.n_dirs = std::stoi(kv["n_dirs"]);
    h.time = std::stod(kv["time"]);
    h.epsilon = std::stod(kv["epsilon"]);
    return h;
}

void read_payload(const std::string& path, std::vector<double>& v) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load: cannot open " + path);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
        throw std::runtime_error("load: short read from " + path);
}

}  // namespace

void dump_scalar(const std::string& path, const ScalarField& f, double time, double epsilon) {
    write_header(path, f.grid, 0, time, epsilon);
    write_payload(path, f.v);
}

void dump_directional(const std::string& path, const DirectionalField& f, double time,
                      double epsilon) {
    write_header(path, f.grid, f.ndirs, time, epsilon);
    write_payload(path, f.v);
}

ScalarField load_scalar(const std::string& path) {
    Header h = read_header(path);
    if (h.n_dirs != 0) throw std::runtime_error("load_scalar: dump is directional");
    ScalarField f(h.grid);
    read_payload(path, f.v);
    return f;
}

DirectionalField load_directional(const std::string& path) {
    Header h = read_header(path);
    if (h.n_dirs <= 0) throw std::runtime_error("load_directional: dump is scalar");
    DirectionalField f(h.grid, h.n_dirs);
    read_payload(path, f.v);
    return f;
}

}  // namespace radiff
