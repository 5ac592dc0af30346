#include "kaleido/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace kaleido {

namespace {

// %.17g keeps enough digits that std::stod recovers the exact double, so a
// write/read cycle is lossless and repeated writes stay byte-identical.
std::string fmt_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

}  // namespace

std::string metrics_header() { return "step,seed,scheme,split,return,td_loss,div_loss,sparsity,mean_hamming,flops_fwd"; }

void write_metrics_csv(const std::string& path, std::vector<MetricsRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
        return std::tie(a.seed, a.step, a.split) < std::tie(b.seed, b.step, b.split);
    });
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    f << metrics_header() << "\n";
    for (const auto& r : rows) {
        f << r.step << ',' << r.seed << ',' << r.scheme << ',' << r.split << ',' << fmt_double(r.ret) << ','
          << fmt_double(r.td_loss) << ',' << fmt_double(r.div_loss) << ',' << fmt_double(r.sparsity) << ','
          << fmt_double(r.mean_hamming) << ',' << r.flops_fwd << "\n";
    }
    if (!f) throw std::runtime_error("write_metrics_csv: write failed for " + path);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_metrics_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("read_metrics_csv: empty file " + path);
    if (line != metrics_header())
        throw std::runtime_error("read_metrics_csv: unexpected header in " + path + ": " + line);
    std::vector<MetricsRow> rows;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 10)
            throw std::runtime_error("read_metrics_csv: " + path + ":" + std::to_string(lineno) +
                                     ": expected 10 fields, got " + std::to_string(fields.size()));
        MetricsRow r;
        try {
            r.step = std::stoll(fields[0]);
            r.seed = std::stoull(fields[1]);
            r.scheme = fields[2];
            r.split = fields[3];
            r.ret = std::stod(fields[4]);
            r.td_loss = std::stod(fields[5]);
            r.div_loss = std::stod(fields[6]);
            r.sparsity = std::stod(fields[7]);
            r.mean_hamming = std::stod(fields[8]);
            r.flops_fwd = std::stoll(fields[9]);
        } catch (const std::exception&) {
            throw std::runtime_error("read_metrics_csv: " + path + ":" + std::to_string(lineno) + ": bad field");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace kaleido
