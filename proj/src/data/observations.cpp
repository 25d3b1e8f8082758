#include "elastipinn/data/observations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace elastipinn::data {

namespace {

const std::vector<std::string> kBaseColumns{"x", "y", "z", "ux", "uy", "uz"};
const std::vector<std::string> kStrainColumns{"E11", "E22", "E33", "E12", "E13", "E23"};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": malformed number '" + s + "'");
    if (!std::isfinite(v)) throw std::runtime_error("line " + std::to_string(line_no) + ": non-finite value");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

mech::Mat3d ObservationSet::strain(Eigen::Index i) const {
    if (!E) throw std::logic_error("observation set has no strain payload");
    return unpack_strain(E->col(i));
}

Eigen::Matrix<double, 6, 1> pack_strain(const mech::Mat3d& E) {
    Eigen::Matrix<double, 6, 1> e;
    e << E(0, 0), E(1, 1), E(2, 2), E(0, 1), E(0, 2), E(1, 2);
    return e;
}

mech::Mat3d unpack_strain(const Eigen::Matrix<double, 6, 1>& e) {
    mech::Mat3d E;
    E << e[0], e[3], e[4], e[3], e[1], e[5], e[4], e[5], e[2];
    return E;
}

ObservationSet import_fem_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    const auto header = split_csv(line);
    const bool strain = header.size() == 12;
    if (header.size() != 6 && !strain) throw std::runtime_error(path + ": header must have 6 or 12 columns");
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& want = c < 6 ? kBaseColumns[c] : kStrainColumns[c - 6];
        if (header[c] != want) throw std::runtime_error(path + ": column " + std::to_string(c + 1) + " must be '" + want + "'");
    }
    std::vector<std::array<double, 12>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
        std::array<double, 12> r{};
        for (std::size_t c = 0; c < cells.size(); ++c) r[c] = parse_number(cells[c], line_no);
        rows.push_back(r);
    }
    ObservationSet obs;
    obs.provenance = "fem-import";
    const auto n = static_cast<Eigen::Index>(rows.size());
    obs.x.resize(3, n);
    obs.u.resize(3, n);
    if (strain) obs.E = StrainBlock(6, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        obs.x.col(i) << r[0], r[1], r[2];
        obs.u.col(i) << r[3], r[4], r[5];
        if (strain)
            for (int k = 0; k < 6; ++k) (*obs.E)(k, i) = r[static_cast<std::size_t>(6 + k)];
    }
    obs.u_clean = obs.u;
    std::ifstream side(path + ".json");
    if (side) {
        const auto j = nlohmann::json::parse(side);
        obs.provenance = j.value("provenance", obs.provenance);
        if (j.contains("noise")) {
            obs.noise.sigma = j["noise"].value("sigma", 0.0);
            obs.noise.ld = j["noise"].value("ld", 0.0);
            obs.noise.seed = j["noise"].value("seed", std::uint64_t{0});
        }
    }
    return obs;
}

void export_csv(const ObservationSet& obs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::vector<std::string> cols = kBaseColumns;
    if (obs.E) cols.insert(cols.end(), kStrainColumns.begin(), kStrainColumns.end());
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (Eigen::Index i = 0; i < obs.size(); ++i) {
        for (int k = 0; k < 3; ++k) out << (k ? "," : "") << format_double(obs.x(k, i));
        for (int k = 0; k < 3; ++k) out << ',' << format_double(obs.u(k, i));
        if (obs.E)
            for (int k = 0; k < 6; ++k) out << ',' << format_double((*obs.E)(k, i));
        out << '\n';
    }
    nlohmann::json side = {{"provenance", obs.provenance},
                           {"noise", {{"sigma", obs.noise.sigma}, {"ld", obs.noise.ld}, {"seed", obs.noise.seed}}},
                           {"count", obs.size()},
                           {"has_strain", obs.has_strain()}};
    std::ofstream(path + ".json") << side.dump(2) << '\n';
}

double max_displacement_norm(const Eigen::Matrix3Xd& u) {
    return u.cols() ? u.colwise().norm().maxCoeff() : 0.0;
}

ObservationSet add_noise(const ObservationSet& obs, double ld, std::uint64_t seed) {
    if (!(ld >= 0.0)) throw std::invalid_argument("add_noise: LD must be >= 0");
    ObservationSet out = obs;
    if (out.u_clean.cols() != out.u.cols()) out.u_clean = out.u;
    if (ld == 0.0) return out;
    const double sigma = ld * max_displacement_norm(out.u_clean) / 3.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, sigma);
    out.u = out.u_clean;
    for (Eigen::Index i = 0; i < out.u.size(); ++i) out.u.data()[i] += nd(rng);
    out.noise = {sigma, ld, seed};
    return out;
}

ObservationSet downsample_to_pixels(const ObservationSet& obs, double spacing, const sampling::SlabGeometry& g) {
    if (!(spacing > 0.0)) throw std::invalid_argument("downsample: spacing must be > 0");
    const Eigen::Vector3d e = g.extent();
    if (spacing > e.minCoeff()) throw std::invalid_argument("downsample: spacing larger than the domain");
    // cells in order of first appearance
    std::map<std::array<long, 3>, std::size_t> slot;
    std::vector<std::vector<Eigen::Index>> cells;
    for (Eigen::Index i = 0; i < obs.size(); ++i) {
        std::array<long, 3> key{};
        for (int a = 0; a < 3; ++a)
            key[static_cast<std::size_t>(a)] = static_cast<long>(std::floor(obs.x(a, i) / spacing + 1e-9));
        const auto [it, fresh] = slot.emplace(key, cells.size());
        if (fresh) cells.emplace_back();
        cells[it->second].push_back(i);
    }
    ObservationSet out;
    out.provenance = obs.provenance;
    out.noise = obs.noise;
    const auto n = static_cast<Eigen::Index>(cells.size());
    out.x.resize(3, n);
    out.u.resize(3, n);
    out.u_clean.resize(3, n);
    const bool clean = obs.u_clean.cols() == obs.size();
    if (obs.E) out.E = StrainBlock(6, n);
    Eigen::Index c = 0;
    for (const auto& idx : cells) {
        Eigen::Vector3d xs = Eigen::Vector3d::Zero(), us = Eigen::Vector3d::Zero(), uc = Eigen::Vector3d::Zero();
        Eigen::Matrix<double, 6, 1> es = Eigen::Matrix<double, 6, 1>::Zero();
        for (Eigen::Index i : idx) {
            xs += obs.x.col(i);
            us += obs.u.col(i);
            uc += clean ? Eigen::Vector3d(obs.u_clean.col(i)) : Eigen::Vector3d(obs.u.col(i));
            if (obs.E) es += obs.E->col(i);
        }
        const double inv = 1.0 / static_cast<double>(idx.size());
        out.x.col(c) = xs * inv;
        out.u.col(c) = us * inv;
        out.u_clean.col(c) = uc * inv;
        if (obs.E) out.E->col(c) = es * inv;
        ++c;
    }
    return out;
}

ObservationSet subsample(const ObservationSet& obs, Eigen::Index n, std::uint64_t seed) {
    if (n >= obs.size()) return obs;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(obs.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates
    for (Eigen::Index i = 0; i < n; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, obs.size() - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(n));
    std::sort(idx.begin(), idx.end());
    ObservationSet out;
    out.provenance = obs.provenance;
    out.noise = obs.noise;
    out.x.resize(3, n);
    out.u.resize(3, n);
    out.u_clean.resize(3, n);
    if (obs.E) out.E = StrainBlock(6, n);
    const bool clean = obs.u_clean.cols() == obs.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index i = idx[static_cast<std::size_t>(k)];
        out.x.col(k) = obs.x.col(i);
        out.u.col(k) = obs.u.col(i);
        out.u_clean.col(k) = clean ? obs.u_clean.col(i) : obs.u.col(i);
        if (obs.E) out.E->col(k) = obs.E->col(i);
    }
    return out;
}

}  // namespace elastipinn::data
