#include "runaway/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace runaway {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename into " + path + ": " + ec.message());
    }
}

std::string series_csv_row(const TimeSeriesRecord& r) {
    const double fields[] = {r.t,    r.V[0], r.V[1], r.V[2], r.T,     r.R[0],
                             r.R[1], r.R[2], r.mass, r.loss, r.ratio, r.dist};
    std::string line;
    for (std::size_t i = 0; i < std::size(fields); ++i) {
        if (i) line += ',';
        line += format_double(fields[i]);
    }
    return line;
}

std::string series_csv(const std::vector<TimeSeriesRecord>& records) {
    std::string out = kSeriesHeader;
    out += '\n';
    for (const auto& r : records) {
        out += series_csv_row(r);
        out += '\n';
    }
    return out;
}

std::vector<TimeSeriesRecord> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open series file " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty series file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSeriesHeader) throw std::runtime_error(path + ": unexpected header '" + line + "'");
    std::vector<TimeSeriesRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double v[12];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int i = 0; i < 12; ++i) {
            const auto res = std::from_chars(p, end, v[i]);
            if (res.ec != std::errc()) {
                throw std::runtime_error(path + ": malformed value at line " + std::to_string(lineno));
            }
            p = res.ptr;
            if (i < 11) {
                if (p == end || *p != ',') throw std::runtime_error(path + ": too few columns at line " + std::to_string(lineno));
                ++p;
            }
        }
        if (p != end) throw std::runtime_error(path + ": too many columns at line " + std::to_string(lineno));
        TimeSeriesRecord r;
        r.t = v[0];
        r.V = {v[1], v[2], v[3]};
        r.T = v[4];
        r.R = {v[5], v[6], v[7]};
        r.mass = v[8];
        r.loss = v[9];
        r.ratio = v[10];
        r.dist = v[11];
        if (!out.empty() && !(r.t > out.back().t)) {
            throw std::runtime_error(path + ": time not increasing at line " + std::to_string(lineno));
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace runaway
