#include "vibronic/propagator.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

// Layout (one record per line):
//   vibronic-checkpoint <version>
//   L <int>  nu_max <int>
//   J|omega|g|delta_eps <hexfloat>
//   time <hexfloat>
//   leak <hexfloat>
//   entries <count>
//   <site> <nu_0> ... <nu_{L-1}> <re> <im>     (count lines, support order)
//   end

namespace vibronic {

namespace {

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad number '" + s + "'");
    return v;
}

std::string expect_key(std::istream& is, const std::string& key) {
    std::string k, v;
    if (!(is >> k >> v) || k != key) throw std::runtime_error("checkpoint: expected '" + key + "'");
    return v;
}

} // namespace

void write_checkpoint(std::ostream& os, const SparseWavefunction& psi, double time) {
    const auto& p = psi.params();
    os << "vibronic-checkpoint " << checkpoint_version << '\n';
    os << "L " << p.L << '\n' << "nu_max " << p.nu_max << '\n';
    os << "J " << hex(p.J) << '\n' << "omega " << hex(p.omega) << '\n';
    os << "g " << hex(p.g) << '\n' << "delta_eps " << hex(p.delta_eps) << '\n';
    os << "time " << hex(time) << '\n' << "leak " << hex(psi.leak()) << '\n';
    os << "entries " << psi.size() << '\n';
    const auto& sup = psi.support();
    auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < psi.size(); ++i) {
        os << sup.site(i);
        for (auto nu : sup.phonons(i)) os << ' ' << static_cast<int>(nu);
        os << ' ' << hex(amps[i].real()) << ' ' << hex(amps[i].imag()) << '\n';
    }
    os << "end\n";
}

void write_checkpoint_file(const std::string& path, const SparseWavefunction& psi, double time) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot open " + tmp);
        write_checkpoint(os, psi, time);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "vibronic-checkpoint")
        throw std::runtime_error("checkpoint: missing header");
    if (version != checkpoint_version)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    ChainParams p;
    p.L = std::stoi(expect_key(is, "L"));
    p.nu_max = std::stoi(expect_key(is, "nu_max"));
    p.J = parse_double(expect_key(is, "J"));
    p.omega = parse_double(expect_key(is, "omega"));
    p.g = parse_double(expect_key(is, "g"));
    p.delta_eps = parse_double(expect_key(is, "delta_eps"));
    p.validate();
    const double time = parse_double(expect_key(is, "time"));
    const double leak = parse_double(expect_key(is, "leak"));
    const std::size_t count = std::stoul(expect_key(is, "entries"));

    SupportSet sup(p.L);
    sup.reserve(count);
    std::vector<complex> amps;
    amps.reserve(count);
    BasisState bs{0, std::vector<std::uint8_t>(p.L)};
    for (std::size_t i = 0; i < count; ++i) {
        int site = 0;
        if (!(is >> site)) throw std::runtime_error("checkpoint: truncated entry list");
        bs.exciton_site = site;
        for (int j = 0; j < p.L; ++j) {
            int nu = 0;
            is >> nu;
            bs.phonons[j] = static_cast<std::uint8_t>(nu);
            if (nu < 0 || nu > p.nu_max) throw std::runtime_error("checkpoint: occupation out of range");
        }
        std::string re, im;
        if (!(is >> re >> im)) throw std::runtime_error("checkpoint: truncated entry list");
        validate_state(bs, p);
        if (!sup.insert(bs).second) throw std::runtime_error("checkpoint: duplicate basis state");
        amps.emplace_back(parse_double(re), parse_double(im));
    }
    std::string end;
    if (!(is >> end) || end != "end") throw std::runtime_error("checkpoint: missing end marker");
    return Checkpoint{SparseWavefunction(p, std::move(sup), std::move(amps), leak), time};
}

Checkpoint read_checkpoint_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_checkpoint(is);
}

} // namespace vibronic
