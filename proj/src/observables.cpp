#include "vibronic/observables.hpp"

#include "vibronic/hilbert.hpp"

#include <cmath>
#include <string>

namespace vibronic {

std::vector<double> density(const SparseWavefunction& psi) {
    std::vector<double> d(psi.params().L, 0.0);
    const auto& sup = psi.support();
    auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) d[sup.site(i)] += std::norm(amps[i]);
    return d;
}

Moments mean_and_rmsd(std::span<const double> d) {
    double total = 0.0;
    for (double v : d) total += v;
    if (!(total > 0.0)) throw invalid_parameter("mean_and_rmsd: density has zero total weight");
    double mean = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) mean += static_cast<double>(j) * d[j];
    mean /= total;
    double var = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double x = static_cast<double>(j) - mean;
        var += d[j] * x * x;
    }
    var /= total;
    return {mean, std::sqrt(std::max(var, 0.0))};
}

double total_phonons(const SparseWavefunction& psi) {
    const auto& sup = psi.support();
    auto amps = psi.amplitudes();
    double s = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        int n = 0;
        for (auto nu : sup.phonons(i)) n += nu;
        s += n * std::norm(amps[i]);
    }
    return s;
}

void ObservableSeries::append(double time, const SparseWavefunction& psi) {
    const double n2 = psi.norm2();
    append(time, psi, n2 > 0.0 ? expectation_energy(psi) / n2 : 0.0);
}

void ObservableSeries::append(double time, const SparseWavefunction& psi, double e) {
    if (L == 0) L = psi.params().L;
    auto d = vibronic::density(psi);
    const double n2 = psi.norm2();
    times.push_back(time);
    Moments m = n2 > 0.0 ? mean_and_rmsd(d) : Moments{};
    xbar.push_back(m.mean);
    rmsd.push_back(m.rmsd);
    norm2.push_back(n2);
    energy.push_back(e);
    phonons.push_back(n2 > 0.0 ? total_phonons(psi) / n2 : 0.0);
    density.push_back(std::move(d));
}

CsvTable ObservableSeries::to_table() const {
    CsvTable t;
    t.header = {"time", "norm2", "energy", "xbar", "rmsd"};
    for (int j = 0; j < L; ++j) t.header.push_back("n_" + std::to_string(j));
    t.header.push_back("phonons");
    for (std::size_t k = 0; k < size(); ++k) {
        std::vector<double> row{times[k], norm2[k], energy[k], xbar[k], rmsd[k]};
        row.insert(row.end(), density[k].begin(), density[k].end());
        row.push_back(phonons[k]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

ObservableSeries ObservableSeries::from_table(const CsvTable& table) {
    ObservableSeries s;
    int L = 0;
    while (true) {
        bool found = false;
        for (const auto& h : table.header)
            if (h == "n_" + std::to_string(L)) found = true;
        if (!found) break;
        ++L;
    }
    s.L = L;
    const auto ct = table.column("time"), cn = table.column("norm2"), ce = table.column("energy"),
               cx = table.column("xbar"), cr = table.column("rmsd"), c0 = table.column("n_0");
    const std::size_t cp = table.column("phonons");
    for (const auto& row : table.rows) {
        s.times.push_back(row[ct]);
        s.norm2.push_back(row[cn]);
        s.energy.push_back(row[ce]);
        s.xbar.push_back(row[cx]);
        s.rmsd.push_back(row[cr]);
        s.phonons.push_back(row[cp]);
        s.density.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(c0),
                               row.begin() + static_cast<std::ptrdiff_t>(c0 + L));
    }
    return s;
}

} // namespace vibronic
