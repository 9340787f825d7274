#include "randcert/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace randcert {

using nlohmann::json;

json complex_matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix complex_matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix json: expected nonempty array of rows");
    const auto nrows = static_cast<Eigen::Index>(j.size());
    const auto ncols = static_cast<Eigen::Index>(j.at(0).size());
    ComplexMatrix m(nrows, ncols);
    for (Eigen::Index i = 0; i < nrows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != ncols)
            throw std::invalid_argument("matrix json: ragged rows");
        for (Eigen::Index k = 0; k < ncols; ++k) {
            const auto& cell = row.at(static_cast<std::size_t>(k));
            if (!cell.is_array() || cell.size() != 2)
                throw std::invalid_argument("matrix json: entries must be [re, im] pairs");
            m(i, k) = std::complex<double>(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    }
    return m;
}

json assemblage_to_json(const Assemblage& a) {
    json sigma = json::array();
    for (int out = 0; out < a.d; ++out)
        for (int x = 1; x <= a.m; ++x) sigma.push_back(complex_matrix_to_json(a.sigma(out, x)));
    return json{{"type", "assemblage"}, {"m", a.m}, {"d", a.d}, {"dimB", a.dim_b}, {"sigma", std::move(sigma)}};
}

Assemblage assemblage_from_json(const json& j) {
    if (j.value("type", "") != "assemblage") throw std::invalid_argument("assemblage json: type must be \"assemblage\"");
    const int m = j.at("m").get<int>();
    const int d = j.at("d").get<int>();
    const int dim_b = j.at("dimB").get<int>();
    Assemblage a = make_assemblage(m, d, dim_b);
    const auto& sigma = j.at("sigma");
    if (!sigma.is_array() || sigma.size() != static_cast<std::size_t>(m * d))
        throw std::invalid_argument("assemblage json: sigma must hold m*d matrices");
    std::size_t idx = 0;
    for (int out = 0; out < d; ++out)
        for (int x = 1; x <= m; ++x) {
            ComplexMatrix s = complex_matrix_from_json(sigma.at(idx++));
            if (s.rows() != dim_b || s.cols() != dim_b)
                throw std::invalid_argument("assemblage json: sigma block dimension mismatch");
            a.sigma(out, x) = std::move(s);
        }
    return a;
}

json behavior_to_json(const Behavior& b) {
    json px = json::array();
    for (int x = 1; x <= b.m_a; ++x) {
        json py = json::array();
        for (int y = 1; y <= b.m_b; ++y) {
            json pa = json::array();
            for (int out_a = 0; out_a < b.d_a; ++out_a) {
                json pb = json::array();
                for (int out_b = 0; out_b < b.d_b; ++out_b) pb.push_back(b.p(out_a, out_b, x, y));
                pa.push_back(std::move(pb));
            }
            py.push_back(std::move(pa));
        }
        px.push_back(std::move(py));
    }
    return json{{"type", "behavior"}, {"mA", b.m_a}, {"mB", b.m_b}, {"dA", b.d_a}, {"dB", b.d_b}, {"p", std::move(px)}};
}

Behavior behavior_from_json(const json& j) {
    if (j.value("type", "") != "behavior") throw std::invalid_argument("behavior json: type must be \"behavior\"");
    Behavior b = make_behavior(j.at("mA").get<int>(), j.at("mB").get<int>(), j.at("dA").get<int>(),
                               j.at("dB").get<int>());
    const auto& px = j.at("p");
    if (px.size() != static_cast<std::size_t>(b.m_a)) throw std::invalid_argument("behavior json: p has wrong x extent");
    for (int x = 1; x <= b.m_a; ++x) {
        const auto& py = px.at(static_cast<std::size_t>(x - 1));
        if (py.size() != static_cast<std::size_t>(b.m_b)) throw std::invalid_argument("behavior json: p has wrong y extent");
        for (int y = 1; y <= b.m_b; ++y) {
            const auto& pa = py.at(static_cast<std::size_t>(y - 1));
            if (pa.size() != static_cast<std::size_t>(b.d_a)) throw std::invalid_argument("behavior json: p has wrong a extent");
            for (int out_a = 0; out_a < b.d_a; ++out_a) {
                const auto& pb = pa.at(static_cast<std::size_t>(out_a));
                if (pb.size() != static_cast<std::size_t>(b.d_b)) throw std::invalid_argument("behavior json: p has wrong b extent");
                for (int out_b = 0; out_b < b.d_b; ++out_b)
                    b.p(out_a, out_b, x, y) = pb.at(static_cast<std::size_t>(out_b)).get<double>();
            }
        }
    }
    return b;
}

json measurement_set_to_json(const MeasurementSet& m) {
    json effects = json::array();
    for (const auto& povm : m.povms) {
        json per_outcome = json::array();
        for (const auto& e : povm.effects) per_outcome.push_back(complex_matrix_to_json(e));
        effects.push_back(std::move(per_outcome));
    }
    return json{{"type", "measurement_set"},
                {"m", m.inputs()},
                {"d", m.outcomes()},
                {"dim", m.dim()},
                {"effects", std::move(effects)}};
}

MeasurementSet measurement_set_from_json(const json& j) {
    if (j.value("type", "") != "measurement_set")
        throw std::invalid_argument("measurement set json: type must be \"measurement_set\"");
    const int m = j.at("m").get<int>();
    const int d = j.at("d").get<int>();
    const int dim = j.at("dim").get<int>();
    const auto& effects = j.at("effects");
    if (effects.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("measurement set json: effects has wrong input extent");
    MeasurementSet out;
    for (int x = 0; x < m; ++x) {
        const auto& per_outcome = effects.at(static_cast<std::size_t>(x));
        if (per_outcome.size() != static_cast<std::size_t>(d))
            throw std::invalid_argument("measurement set json: effects has wrong outcome extent");
        Povm povm;
        for (int out_a = 0; out_a < d; ++out_a) {
            ComplexMatrix e = complex_matrix_from_json(per_outcome.at(static_cast<std::size_t>(out_a)));
            if (e.rows() != dim || e.cols() != dim)
                throw std::invalid_argument("measurement set json: effect dimension mismatch");
            povm.effects.push_back(std::move(e));
        }
        out.povms.push_back(std::move(povm));
    }
    return out;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return json::parse(f);
}

}  // namespace randcert
