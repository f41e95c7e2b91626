#include "oarvc/oar.hpp"

#include <gtest/gtest.h>

namespace oarvc {
namespace {

OarFrame one_car_frame() {
    OarFrame frame;
    frame.frame_index = 1;
    frame.objects = {1};
    frame.attributes[1] = {10, 10, 20, 20, 0.0, Category::kCar};
    return frame;
}

TEST(OarModel, ValidFrameAccepted) {
    const OarFrame frame = one_car_frame();
    const Verdict v = validate_frame(frame, 512, 512);
    EXPECT_TRUE(v.ok) << v.message;
}

TEST(OarModel, XExceedsWidthRejected) {
    OarFrame frame = one_car_frame();
    frame.attributes[1].x = 600;
    const Verdict v = validate_frame(frame, 512, 512);
    EXPECT_FALSE(v.ok);
    EXPECT_NE(v.message.find("x exceeds W"), std::string::npos) << v.message;
    EXPECT_NE(v.message.find("object 1"), std::string::npos) << v.message;
}

TEST(OarModel, DanglingRelationEndpointRejected) {
    OarFrame frame = one_car_frame();
    frame.relations.push_back({7, kBackgroundId, RelationLabel::kIn});
    const Verdict v = validate_frame(frame, 512, 512);
    EXPECT_FALSE(v.ok);
    EXPECT_NE(v.message.find("dangling relation endpoint"), std::string::npos) << v.message;
}

TEST(OarModel, BackgroundEndpointsAllowed) {
    OarFrame frame = one_car_frame();
    frame.relations.push_back({1, kBackgroundId, RelationLabel::kIn});
    frame.relations.push_back({kBackgroundId, 1, RelationLabel::kOcclusion});
    EXPECT_TRUE(validate_frame(frame, 512, 512).ok);
}

TEST(OarModel, SelfRelationRejected) {
    OarFrame frame = one_car_frame();
    frame.relations.push_back({1, 1, RelationLabel::kOcclusion});
    EXPECT_FALSE(validate_frame(frame, 512, 512).ok);
}

TEST(OarModel, AngleRangeEnforced) {
    OarFrame frame = one_car_frame();
    frame.attributes[1].angle = 360.0;
    EXPECT_FALSE(validate_frame(frame, 512, 512).ok);
    frame.attributes[1].angle = -1.0;
    EXPECT_FALSE(validate_frame(frame, 512, 512).ok);
    frame.attributes[1].angle = 359.999;
    EXPECT_TRUE(validate_frame(frame, 512, 512).ok);
}

TEST(OarModel, EnumCodesRoundTrip) {
    for (int i = 0; i < kCategoryCount; ++i) {
        const Category c = static_cast<Category>(i);
        EXPECT_EQ(category_from_string(std::string(to_string(c))), c);
        EXPECT_EQ(static_cast<int>(c), i);
    }
    for (int i = 0; i < kRelationLabelCount; ++i) {
        const RelationLabel r = static_cast<RelationLabel>(i);
        EXPECT_EQ(relation_label_from_string(std::string(to_string(r))), r);
        EXPECT_EQ(static_cast<int>(r), i);
    }
    EXPECT_EQ(category_from_string("truck"), Category::kOthers);
}

TEST(OarModel, DepthRuleFrontIsLowerBottomEdge) {
    const Attributes a{10, 10, 20, 290, 0.0, Category::kCar};  // bottom 300
    const Attributes b{15, 10, 20, 240, 0.0, Category::kCar};  // bottom 250
    EXPECT_TRUE(is_in_front(1, a, 2, b));
    EXPECT_FALSE(is_in_front(2, b, 1, a));
    // tie broken by smaller id
    const Attributes c{0, 0, 10, 300, 0.0, Category::kCar};
    const Attributes d{5, 0, 10, 300, 0.0, Category::kCar};
    EXPECT_TRUE(is_in_front(3, c, 4, d));
    EXPECT_FALSE(is_in_front(4, d, 3, c));
}

TEST(OarModel, IntersectionArea) {
    const Attributes a{0, 0, 10, 10, 0.0, Category::kCar};
    const Attributes b{5, 5, 10, 10, 0.0, Category::kCar};
    const Attributes c{20, 20, 5, 5, 0.0, Category::kCar};
    EXPECT_EQ(intersection_area(a, b), 25);
    EXPECT_EQ(intersection_area(a, c), 0);
    // touching edges do not intersect
    const Attributes d{10, 0, 10, 10, 0.0, Category::kCar};
    EXPECT_EQ(intersection_area(a, d), 0);
}

}  // namespace
}  // namespace oarvc
