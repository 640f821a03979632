#ifndef PRIMEINEQ_CONFIG_HPP
#define PRIMEINEQ_CONFIG_HPP

// Problem configuration (the CLI's contract): a single JSON document with
// matrix entries in the textual scalar syntax.  Emitted reports embed every
// default so they are self-contained, and parse -> emit -> parse is the
// identity.

#include "forms.hpp"

#include <json.hpp>

#include <fstream>

namespace primeineq {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

struct ProblemConfig {
    std::vector<std::vector<std::string>> matrix; // textual scalars
    std::vector<double> v;
    double epsilon = 1.0;
    long long N = 10000;
    std::vector<long long> N_list; // used by compare; defaults to {N}
    double C = 100.0;
    double gamma = 0.1;
    long long W = 30;
    std::vector<long long> W_per_coordinate;
    double eta = 0.25;
    double delta = 0.1;
    long long P_cut = 10000;
    long long budget = 1000000;
    std::uint64_t seed = 1;
    unsigned workers = 0; // 0 = hardware
    std::string out_json, out_csv;

    static ProblemConfig from_json(const nlohmann::json& j)
    {
        ProblemConfig c;
        c.matrix = j.at("matrix").get<std::vector<std::vector<std::string>>>();
        c.v = j.at("v").get<std::vector<double>>();
        c.epsilon = j.at("epsilon").get<double>();
        c.N = j.at("N").get<long long>();
        if (j.contains("N_list")) c.N_list = j["N_list"].get<std::vector<long long>>();
        if (c.N_list.empty()) c.N_list = {c.N};
        if (j.contains("C")) c.C = j["C"].get<double>();
        if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
        if (j.contains("W")) c.W = j["W"].get<long long>();
        if (j.contains("W_per_coordinate"))
            c.W_per_coordinate = j["W_per_coordinate"].get<std::vector<long long>>();
        if (j.contains("eta")) c.eta = j["eta"].get<double>();
        if (j.contains("delta")) c.delta = j["delta"].get<double>();
        if (j.contains("P_cut")) c.P_cut = j["P_cut"].get<long long>();
        if (j.contains("budget")) c.budget = j["budget"].get<long long>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("workers")) c.workers = j["workers"].get<unsigned>();
        if (j.contains("output")) {
            if (j["output"].contains("json"))
                c.out_json = j["output"]["json"].get<std::string>();
            if (j["output"].contains("csv"))
                c.out_csv = j["output"]["csv"].get<std::string>();
        }
        c.validate();
        return c;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["matrix"] = matrix;
        j["v"] = v;
        j["epsilon"] = epsilon;
        j["N"] = N;
        j["N_list"] = N_list;
        j["C"] = C;
        j["gamma"] = gamma;
        j["W"] = W;
        j["W_per_coordinate"] = W_per_coordinate;
        j["eta"] = eta;
        j["delta"] = delta;
        j["P_cut"] = P_cut;
        j["budget"] = budget;
        j["seed"] = seed;
        j["workers"] = workers;
        j["output"] = {{"json", out_json}, {"csv", out_csv}};
        return j;
    }

    void validate() const
    {
        if (matrix.empty() || matrix[0].empty())
            throw std::invalid_argument("config: empty matrix");
        for (const auto& row : matrix)
            if (row.size() != matrix[0].size())
                throw std::invalid_argument("config: ragged matrix");
        if (v.size() != matrix.size())
            throw std::invalid_argument("config: v length != matrix rows");
        if (!(epsilon > 0)) throw std::invalid_argument("config: epsilon <= 0");
        if (N < 2) throw std::invalid_argument("config: N < 2");
        for (long long n : N_list)
            if (n < 2) throw std::invalid_argument("config: N_list entry < 2");
        if (!(gamma > 0 && gamma < 1))
            throw std::invalid_argument("config: gamma outside (0,1)");
        if (W < 1) throw std::invalid_argument("config: W < 1");
        if (!(eta > 0)) throw std::invalid_argument("config: eta <= 0");
        if (!(delta > 0 && delta <= 1))
            throw std::invalid_argument("config: delta outside (0,1]");
        if (P_cut < 2) throw std::invalid_argument("config: P_cut < 2");
        if (budget < 1) throw std::invalid_argument("config: budget < 1");
    }

    static ProblemConfig load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::invalid_argument("config: cannot open '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument(std::string("config: JSON parse error: ") +
                                        e.what());
        }
        return from_json(j);
    }

    // builds the exact field and system; N_override substitutes N
    LinearSystem system(long long N_override = 0) const
    {
        std::vector<ParsedScalar> all;
        for (const auto& row : matrix)
            for (const auto& s : row) all.push_back(parse_scalar(s));
        FieldPtr f = field_for_scalars(all);
        FieldMatrix L(matrix.size(), matrix[0].size(), FieldElement::zero(f));
        std::size_t idx = 0;
        for (std::size_t i = 0; i < matrix.size(); i++)
            for (std::size_t j = 0; j < matrix[0].size(); j++)
                L(i, j) = embed_scalar(f, all[idx++]);
        return LinearSystem(L, v, epsilon, N_override > 0 ? N_override : N, C);
    }

    std::vector<long long> per_coordinate_W() const
    {
        if (!W_per_coordinate.empty()) {
            if (W_per_coordinate.size() != matrix[0].size())
                throw std::invalid_argument("config: W_per_coordinate length != d");
            return W_per_coordinate;
        }
        return std::vector<long long>(matrix[0].size(), W);
    }
};

} // namespace primeineq

#endif
