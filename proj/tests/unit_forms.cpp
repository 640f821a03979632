#include <catch2/catch_amalgamated.hpp>

#include <primeineq/counter.hpp>

#include "test_helpers.hpp"

using namespace primeineq;
using namespace primeineq::testing;

TEST_CASE("linear system construction validates hypotheses")
{
    // rank-deficient -> hard error
    auto L = from_scalars({{"1", "2", "1"}, {"2", "4", "2"}});
    CHECK_THROWS_AS(LinearSystem(L, {0, 0}, 1.0, 100), std::invalid_argument);
    // ||v|| > CN
    auto L2 = from_scalars({{"1", "-1"}});
    CHECK_THROWS_AS(LinearSystem(L2, {1e9}, 1.0, 100, 100.0), std::invalid_argument);
    // d >= m+2 flag
    LinearSystem ok(L2, {0}, 1.0, 100);
    CHECK_FALSE(ok.prediction_ready);
}

TEST_CASE("dual degeneracy")
{
    // the worked example: witness proportional to (0,0,-2,sqrt3)
    auto L = from_scalars({{"1", "-2", "1", "0"}, {"2", "-4", "0", "sqrt3"}});
    LinearSystem ls(L, {0, 0}, 1.0, 100);
    auto dg = is_dual_degenerate(ls);
    REQUIRE(dg.degenerate);
    CHECK(dg.witness[0].is_zero());
    CHECK(dg.witness[1].is_zero());
    auto f = ls.field();
    auto s3 = sqrt_embedding(f, 3);
    // (w2, w3) prop (-2, sqrt3):  w2 * sqrt3 + 2 * w3 = 0
    CHECK((dg.witness[2] * s3 + dg.witness[3] * Rat(2)).is_zero());

    // surd example: non-degenerate
    LinearSystem surd(surd_example(), {0, 0}, 1.0, 100);
    CHECK_FALSE(is_dual_degenerate(surd).degenerate);

    // single row (1,1,1): every multiple has 3 nonzero entries
    auto L3 = from_scalars({{"1", "1", "1"}});
    LinearSystem ls3(L3, {0}, 1.0, 100);
    CHECK_FALSE(is_dual_degenerate(ls3).degenerate);
}

TEST_CASE("minor criterion and degeneracy agree at d = m+2")
{
    std::vector<std::vector<std::vector<std::string>>> systems = {
        {{"1", "0", "sqrt2", "-sqrt3"}, {"0", "1", "sqrt5", "-sqrt7"}},
        {{"1", "-2", "1", "0"}, {"2", "-4", "0", "sqrt3"}},
        {{"1", "0", "1", "0"}, {"0", "1", "0", "1"}},
        {{"1", "-2", "1", "0"}, {"0", "1", "-2", "1"}},
        {{"1", "1", "sqrt2"}},
        {{"2", "3", "5"}},
    };
    for (auto& rows : systems) {
        LinearSystem ls(from_scalars(rows), std::vector<double>(rows.size(), 0.0),
                        1.0, 100);
        if (ls.d != ls.m + 2) continue;
        CHECK(minor_criterion(ls) == !is_dual_degenerate(ls).degenerate);
    }
    // explicit expectations
    LinearSystem surd(surd_example(), {0, 0}, 1.0, 100);
    CHECK(minor_criterion(surd));
    LinearSystem dup(from_scalars({{"1", "0", "1", "0"}, {"0", "1", "0", "1"}}),
                     {0, 0}, 1.0, 100);
    CHECK_FALSE(minor_criterion(dup));
    LinearSystem ap(four_ap_example(), {0, 0}, 1.0, 100);
    CHECK(minor_criterion(ap));
}

TEST_CASE("rational dimension")
{
    LinearSystem ap(four_ap_example(), {0, 0}, 1.0, 100);
    auto rd = rational_dimension(ap);
    CHECK(rd.u == 2);

    LinearSystem surd(surd_example(), {0, 0}, 1.0, 100);
    CHECK(rational_dimension(surd).u == 0);

    LinearSystem rem(remark_example(), {0, 0}, 0.5, 1000);
    auto rr = rational_dimension(rem);
    CHECK(rr.u == 1);
    // Theta prop projection to row 1: second coordinate vanishes
    CHECK(sgn(rr.Theta(0, 1)) == 0);
    CHECK(sgn(rr.Theta(0, 0)) != 0);
}

TEST_CASE("rational reduction core invariants")
{
    for (auto rows : {std::vector<std::vector<std::string>>{
                          {"1", "0", "sqrt2", "-sqrt3"}, {"0", "1", "sqrt5", "-sqrt7"}},
                      {{"1", "-2", "1", "0"}, {"0", "1", "-sqrt3", "1"}},
                      {{"1", "-2", "1", "0"}, {"0", "1", "-2", "1"}}}) {
        LinearSystem ls(from_scalars(rows), {0, 0}, 0.4, 1000);
        auto red = rational_reduction(ls, 0.25, ls.epsilon);

        // columns of Xi lie in ker(ThetaL) and saturate it
        if (red.u > 0) {
            IntMatrix prod = mat_mul(red.ThetaL, red.Xi);
            for (const auto& x : prod.a) CHECK(sgn(x) == 0);
            CHECK(same_column_lattice(red.Xi, kernel_lattice(red.ThetaL)));
            // {x_i} + {Xi} is a lattice basis of Z^d
            IntMatrix B(ls.d, ls.d, Int(0));
            for (std::size_t j = 0; j < red.u; j++)
                for (std::size_t i = 0; i < ls.d; i++) B(i, j) = red.x_basis(i, j);
            for (std::size_t j = 0; j + red.u < ls.d; j++)
                for (std::size_t i = 0; i < ls.d; i++)
                    B(i, red.u + j) = red.Xi(i, j);
            CHECK(cmp(abs(int_det(B)), 1) == 0);
        } else {
            CHECK(red.Xi == IntMatrix::identity(ls.d, Int(1), Int(0)));
        }

        // L' is purely irrational (when it has rows at all)
        if (red.L_prime.rows > 0) {
            LinearSystem lp(red.L_prime, red.v_prime, ls.epsilon, ls.N, 1e9);
            CHECK(rational_dimension(lp).u == 0);
        }

        // nondegenerate L => Xi has finite CS complexity (as forms = rows of
        // the transpose: the coordinate forms xi_j are the ROWS of Xi)
        if (!is_dual_degenerate(ls).degenerate) {
            FormSystem xi_forms = FormSystem::from_int(red.Xi, ls.field());
            CHECK(is_finite_cs_complexity(xi_forms));
        }
    }
}

TEST_CASE("reduction identifies the remark lattice exactly")
{
    LinearSystem ls(remark_example(), {0, 0}, 0.5, 1000);
    auto red = rational_reduction(ls, 0.25, ls.epsilon);
    REQUIRE(red.u == 1);
    IntMatrix expected(4, 3, Int(0));
    expected(0, 0) = 1; expected(1, 0) = 1; expected(2, 0) = 1;
    expected(1, 1) = 1; expected(2, 1) = 2;
    expected(3, 2) = 1;
    CHECK(same_column_lattice(red.Xi, expected));
    CHECK(red.collapsed);
}

TEST_CASE("part-11 identity: shifted G agrees with the substitution form")
{
    LinearSystem ls(remark_example(), {0.1, -0.2}, 0.5, 1000, 1e9);
    auto red = rational_reduction(ls, 0.25, ls.epsilon);
    REQUIRE(!red.shifts.empty());
    auto G = [&](const std::vector<double>& z) {
        double prod = 1;
        for (double zi : z) prod *= std::max(0.0, 1.0 - std::abs(zi) / ls.epsilon);
        return prod;
    };
    auto Gr = red.shifted_G(G, 0);
    Matrix<double> Ln = ls.L_num();
    Matrix<double> Xin(ls.d, ls.d - red.u);
    for (std::size_t i = 0; i < ls.d; i++)
        for (std::size_t j = 0; j + red.u < ls.d; j++)
            Xin(i, j) = red.Xi(i, j).get_d();
    std::uint64_t st = 31337;
    for (int rep = 0; rep < 200; rep++) {
        std::vector<double> x(ls.d - red.u);
        for (auto& xi : x) xi = (uniform01(st) - 0.5) * 3.0;
        // lhs: G_r(L' x + v')
        std::vector<double> y(ls.m - red.u);
        for (std::size_t i = 0; i < y.size(); i++) {
            double acc = red.v_prime[i];
            for (std::size_t j = 0; j < x.size(); j++)
                acc += red.Lp_num(i, j) * x[j];
            y[i] = acc;
        }
        // rhs: G(L Xi x + L r + v)
        std::vector<double> z(ls.m);
        for (std::size_t i = 0; i < ls.m; i++) {
            double acc = red.shifts[0].Lr_plus_v[i];
            for (std::size_t j = 0; j < x.size(); j++) {
                double lx = 0;
                for (std::size_t k = 0; k < ls.d; k++)
                    lx += Ln(i, k) * Xin(k, j);
                acc += lx * x[j];
            }
            z[i] = acc;
        }
        CHECK(Gr(y) == Catch::Approx(G(z)).margin(1e-9));
    }
}

TEST_CASE("decomposition identity for finitely supported weights")
{
    // three systems: rational, mixed u = 1, purely irrational
    std::vector<std::vector<std::vector<std::string>>> mats = {
        {{"1", "-2", "1", "0"}, {"0", "1", "-2", "1"}},
        {{"1", "-2", "1", "0"}, {"0", "1", "-sqrt3", "1"}},
        {{"1", "0", "sqrt2", "-sqrt3"}, {"0", "1", "sqrt5", "-sqrt7"}}};
    for (auto& rows : mats) {
        long long N = 60;
        LinearSystem ls(from_scalars(rows), {0.0, 0.0}, 0.75, N, 1e9);
        auto red = rational_reduction(ls, 0.25, ls.epsilon);

        // weights supported on [1, 40], pseudo-random values
        std::uint64_t st = 5 + rows[0].size();
        std::vector<std::function<double(long long)>> fg;
        std::vector<std::map<long long, double>> fmaps(ls.d);
        for (std::size_t j = 0; j < ls.d; j++) {
            for (long long n = 1; n <= 40; n++)
                fmaps[j][n] = 0.25 + uniform01(st);
            auto& mp = fmaps[j];
            fg.push_back([&mp](long long n) {
                auto it = mp.find(n);
                return it == mp.end() ? 0.0 : it->second;
            });
        }
        auto F = [&](const std::vector<double>& x) {
            double p = 1;
            for (double xi : x)
                p *= std::max(0.0, 1.0 - std::abs(xi - 0.4));
            return p;
        };
        auto G = [&](const std::vector<double>& z) {
            double p = 1;
            for (double zi : z)
                p *= std::max(0.0, 1.0 - std::abs(zi) / ls.epsilon);
            return p;
        };
        // F_radius 0.8 suffices: the weights vanish beyond n = 40 = 0.67 N
        auto chk = decomposition_check(ls, red, fmaps, F, 0.8, G);
        (void)fg;
        INFO("system " << rows[0].size() << " lhs " << chk.lhs << " rhs " << chk.rhs);
        CHECK(chk.diff <= 1e-9 * std::max(1.0, std::abs(chk.lhs)));
    }
}

TEST_CASE("finite Cauchy-Schwarz complexity")
{
    auto f = NumberField::rationals();
    IntMatrix I3 = IntMatrix::identity(3, Int(1), Int(0));
    CHECK(is_finite_cs_complexity(FormSystem::from_int(I3, f)));

    IntMatrix par(2, 1);
    par(0, 0) = 1;
    par(1, 0) = 2;
    CHECK_FALSE(is_finite_cs_complexity(FormSystem::from_int(par, f)));

    IntMatrix ap(4, 2);
    ap(0, 0) = 1; ap(0, 1) = 0;
    ap(1, 0) = 1; ap(1, 1) = 1;
    ap(2, 0) = 1; ap(2, 1) = 2;
    ap(3, 0) = 1; ap(3, 1) = 3;
    CHECK(is_finite_cs_complexity(FormSystem::from_int(ap, f)));
}

TEST_CASE("normal forms and extensions")
{
    auto f = NumberField::rationals();
    IntMatrix I3 = IntMatrix::identity(3, Int(1), Int(0));
    auto id3 = FormSystem::from_int(I3, f);
    CHECK(verify_normal_form(id3, 0));
    auto e0 = normal_form_extension(id3);
    CHECK(e0.s == 0);
    CHECK(e0.d_prime == 3);
    CHECK(e0.f_vectors.empty());

    IntMatrix ap(4, 2);
    ap(0, 0) = 1; ap(0, 1) = 0;
    ap(1, 0) = 1; ap(1, 1) = 1;
    ap(2, 0) = 1; ap(2, 1) = 2;
    ap(3, 0) = 1; ap(3, 1) = 3;
    auto aps = FormSystem::from_int(ap, f);
    CHECK_FALSE(verify_normal_form(aps, 1));
    auto e1 = normal_form_extension(aps);
    CHECK(e1.s == 2);
    CHECK(verify_normal_form(e1.Psi_prime, e1.s));
    CHECK_FALSE(verify_normal_form(e1.Psi_prime, e1.s - 1));

    // Gowers-cube forms x + omega.h: under the literal witness definition the
    // raw system is not in s-normal form for any s (the omega = 0 form has no
    // private witness), but the extension is self-certifying
    IntMatrix cube(4, 3, Int(0));
    cube(0, 0) = 1;
    cube(1, 0) = 1; cube(1, 1) = 1;
    cube(2, 0) = 1; cube(2, 2) = 1;
    cube(3, 0) = 1; cube(3, 1) = 1; cube(3, 2) = 1;
    auto cubes = FormSystem::from_int(cube, f);
    CHECK_FALSE(verify_normal_form(cubes, 1));
    CHECK_FALSE(verify_normal_form(cubes, 2));
    auto e2 = normal_form_extension(cubes);
    CHECK(verify_normal_form(e2.Psi_prime, e2.s));

    // witnesses for psi_(1,1) via the two h coordinates do exist
    // product over {e_h1, e_h2} kills all
    // other forms and is nonzero on psi_(1,1)
    CHECK(!cubes.Psi(3, 1).is_zero());
    CHECK(!cubes.Psi(3, 2).is_zero());
    CHECK(cubes.Psi(0, 1).is_zero());
    CHECK(cubes.Psi(1, 2).is_zero());
    CHECK(cubes.Psi(2, 1).is_zero());

    // infinite complexity is rejected
    IntMatrix par(2, 1);
    par(0, 0) = 1;
    par(1, 0) = 2;
    CHECK_THROWS_AS(normal_form_extension(FormSystem::from_int(par, f)),
                    std::invalid_argument);
}

TEST_CASE("dual lattice")
{
    RatMatrix I2 = RatMatrix::identity(2, Rat(1), Rat(0));
    CHECK(dual_lattice(I2) == I2);

    RatMatrix D(2, 2);
    D(0, 0) = 2; D(1, 1) = 3;
    auto dd = dual_lattice(D);
    CHECK(dd(0, 0) == Rat(1, 2));
    CHECK(dd(1, 1) == Rat(1, 3));

    RatMatrix M(2, 2);
    M(0, 0) = 1; M(0, 1) = 1; M(1, 1) = 2;
    CHECK(rat_det(dual_lattice(M)) == Rat(1, 2));

    RatMatrix S(2, 2); // singular
    S(0, 0) = 1; S(0, 1) = 2; S(1, 0) = 2; S(1, 1) = 4;
    CHECK_THROWS_AS(dual_lattice(S), std::domain_error);
}
