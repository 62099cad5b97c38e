#include <gtest/gtest.h>

#include "fim/common.hpp"
#include "fim/time_grid.hpp"

namespace {

constexpr double kMpor10d = 10.0 / 365.0;

TEST(TimeGridTest, QuarterlyGridTruncatesAtHorizon) {
    const fim::TimeGrid grid = fim::build_time_grid(1.0, 0.25, kMpor10d);
    ASSERT_EQ(grid.obs_times.size(), 4u);
    EXPECT_DOUBLE_EQ(grid.obs_times[0], 0.0);
    EXPECT_DOUBLE_EQ(grid.obs_times[1], 0.25);
    EXPECT_DOUBLE_EQ(grid.obs_times[2], 0.5);
    EXPECT_DOUBLE_EQ(grid.obs_times[3], 0.75);
    EXPECT_DOUBLE_EQ(grid.mpor, kMpor10d);
}

TEST(TimeGridTest, TruncationDropsObservationWhoseMporCrossesHorizon) {
    const fim::TimeGrid grid = fim::build_time_grid(0.5, 0.5, kMpor10d);
    ASSERT_EQ(grid.obs_times.size(), 1u);
    EXPECT_DOUBLE_EQ(grid.obs_times[0], 0.0);
}

TEST(TimeGridTest, MporMustBeSmallerThanStep) {
    EXPECT_THROW(fim::build_time_grid(1.0, 0.25, 0.25), fim::validation_error);
    EXPECT_THROW(fim::build_time_grid(1.0, 0.25, 0.30), fim::validation_error);
    EXPECT_THROW(fim::build_time_grid(1.0, 0.25, 0.0), fim::validation_error);
    EXPECT_THROW(fim::build_time_grid(1.0, 0.0, 0.01), fim::validation_error);
    EXPECT_THROW(fim::build_time_grid(0.0, 0.25, 0.01), fim::validation_error);
    EXPECT_THROW(fim::build_time_grid(0.2, 0.25, 0.01), fim::validation_error);
}

TEST(TimeGridTest, SampleTimesInterleaveObservationAndMporPoints) {
    const fim::TimeGrid grid = fim::build_time_grid(1.0, 0.25, kMpor10d);
    const auto ts = grid.sample_times();
    ASSERT_EQ(ts.size(), 8u);
    for (std::size_t k = 0; k < grid.obs_times.size(); ++k) {
        EXPECT_DOUBLE_EQ(ts[fim::TimeGrid::obs_column(k)], grid.obs_times[k]);
        EXPECT_DOUBLE_EQ(ts[fim::TimeGrid::mpor_column(k)], grid.obs_times[k] + kMpor10d);
    }
    for (std::size_t j = 1; j < ts.size(); ++j) EXPECT_GT(ts[j], ts[j - 1]);
}

TEST(TimeGridTest, ValidateRejectsNonIncreasingTimes) {
    fim::TimeGrid grid;
    grid.mpor = 0.01;
    grid.obs_times = {0.0, 0.5, 0.5};
    EXPECT_THROW(grid.validate(), fim::validation_error);
    grid.obs_times = {0.0, 0.005}; // spacing smaller than mpor
    EXPECT_THROW(grid.validate(), fim::validation_error);
}

} // namespace
