#include <gtest/gtest.h>

#include <cmath>

#include "bondindiff/curves.hpp"

using namespace bondindiff;

namespace {
CurveSpec short_spec(const std::string& fig) {
    CurveSpec base;
    base.maturities = geometric_grid(0.5, 20.0, 6);
    return figure_spec(fig, base);
}
}  // namespace

TEST(Curves, GeometricGrid) {
    const auto g = geometric_grid(0.25, 30.0, 60);
    ASSERT_EQ(g.size(), 60u);
    EXPECT_EQ(g.front(), 0.25);
    EXPECT_EQ(g.back(), 30.0);
    for (std::size_t k = 2; k < g.size(); ++k) EXPECT_NEAR(g[k] / g[k - 1], g[1] / g[0], 1e-12);
    EXPECT_EQ(geometric_grid(2.0, 2.0, 1), std::vector<double>{2.0});
    EXPECT_THROW(geometric_grid(0.0, 1.0, 5), Error);
    EXPECT_THROW(geometric_grid(2.0, 1.0, 5), Error);
}

TEST(Curves, Figure1LeftShapeAndOrdering) {
    const auto spec = short_spec("fig1-left");
    const auto table = build_indifference_curves(spec);
    EXPECT_EQ(table.rows.size(), spec.maturities.size() * (spec.values.size() + 1));
    EXPECT_EQ(table.series("market").size(), spec.maturities.size());
    for (std::size_t k = 0; k < spec.maturities.size(); ++k) {
        double prev = INFINITY;
        for (double g : spec.values) {
            const auto row = table.series("indifference", g)[k];
            ASSERT_TRUE(row.ok()) << row.message;
            EXPECT_LE(row.yield, prev);
            EXPECT_LT(row.residual, 1e-8);
            prev = row.yield;
        }
    }
}

TEST(Curves, Figure1RightNuOrdering) {
    const auto spec = short_spec("fig1-right");
    const auto table = build_indifference_curves(spec);
    for (std::size_t k = 0; k < spec.maturities.size(); ++k) {
        double prev = -INFINITY;
        for (double nu : spec.values) {
            const auto row = table.series("indifference", nu)[k];
            ASSERT_TRUE(row.ok());
            EXPECT_GE(row.yield, prev);
            prev = row.yield;
        }
    }
}

TEST(Curves, Figure2Tables) {
    const auto left = build_lambda_curves(short_spec("fig2-left"));
    EXPECT_EQ(left.rows.size(), 6u * 5u);
    for (const auto& r : left.rows) EXPECT_EQ(r.series, "market");
    const auto right = build_lambda_curves(short_spec("fig2-right"));
    for (const auto& r : right.rows) {
        EXPECT_EQ(r.series, "implied-lambda");
        EXPECT_TRUE(std::isfinite(r.lambda));
    }
    EXPECT_TRUE(figure_uses_lambda_curves("fig2-left"));
    EXPECT_FALSE(figure_uses_lambda_curves("fig1-right"));
}

TEST(Curves, RowsSortedAndThreadIndependent) {
    auto spec = short_spec("fig1-left");
    spec.threads = 1;
    const auto a = build_indifference_curves(spec);
    spec.threads = 4;
    const auto b = build_indifference_curves(spec);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].price, b.rows[k].price);
        if (k > 0) {
            EXPECT_LE(a.rows[k - 1].T, a.rows[k].T);
        }
    }
}

TEST(Curves, FailedRowsAreTagged) {
    CurveSpec spec;
    spec.maturities = {1.0, 5.0};
    spec.fixed.numeraire = Numeraire::MoneyMarket;
    spec.sweep = SweepKind::Nu;
    spec.values = {-1.0, 1.0};
    spec.reference = false;
    const auto table = build_indifference_curves(spec);
    ASSERT_EQ(table.rows.size(), 4u);
    for (const auto& r : table.rows) {
        if (r.sweep_value < 0) {
            EXPECT_EQ(r.status, "domain");
            EXPECT_FALSE(r.message.empty());
        } else {
            EXPECT_TRUE(r.ok());
        }
    }
}

TEST(Curves, SpecValidation) {
    CurveSpec spec;
    spec.maturities = {};
    EXPECT_THROW(build_indifference_curves(spec), Error);
    spec = {};
    spec.maturities = {2.0, 1.0};
    EXPECT_THROW(build_indifference_curves(spec), Error);
    spec = {};
    spec.sweep = SweepKind::Lambda;
    EXPECT_THROW(build_indifference_curves(spec), Error);
    EXPECT_THROW(figure_spec("fig3"), Error);
    spec = {};
    spec.model = AffineModel::vasicek({0.05, 0.03, 0.0});
    EXPECT_THROW(build_lambda_curves(spec), Error);
}
