#ifndef PRIMEINEQ_TEST_HELPERS_HPP
#define PRIMEINEQ_TEST_HELPERS_HPP

#include <primeineq/forms.hpp>

namespace primeineq::testing {

// build a field matrix from textual scalars, one shared field for all entries
inline FieldMatrix from_scalars(const std::vector<std::vector<std::string>>& rows)
{
    std::vector<ParsedScalar> all;
    for (auto& r : rows)
        for (auto& s : r) all.push_back(parse_scalar(s));
    auto f = field_for_scalars(all);
    FieldMatrix M(rows.size(), rows[0].size(), FieldElement::zero(f));
    std::size_t idx = 0;
    for (std::size_t i = 0; i < rows.size(); i++)
        for (std::size_t j = 0; j < rows[0].size(); j++)
            M(i, j) = embed_scalar(f, all[idx++]);
    return M;
}

inline FieldMatrix surd_example()
{
    return from_scalars({{"1", "0", "sqrt2", "-sqrt3"}, {"0", "1", "sqrt5", "-sqrt7"}});
}

inline FieldMatrix remark_example()
{
    return from_scalars({{"1", "-2", "1", "0"}, {"0", "1", "-sqrt3", "1"}});
}

inline FieldMatrix four_ap_example()
{
    return from_scalars({{"1", "-2", "1", "0"}, {"0", "1", "-2", "1"}});
}

} // namespace primeineq::testing

#endif
