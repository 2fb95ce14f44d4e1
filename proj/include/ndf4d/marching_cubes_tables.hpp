#pragma once

#include <array>
#include <cstdint>

namespace ndf4d::mc {

// Corner offsets on the unit cell: 0..3 walk the bottom face
// counter-clockwise, 4..7 the top face.
inline constexpr std::array<std::array<int, 3>, 8> kCorners = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

// Edge e joins corners kEdges[e][0] and kEdges[e][1].
inline constexpr std::array<std::array<int, 2>, 12> kEdges = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

extern const std::int8_t kTriangleTable[256][16];

}  // namespace ndf4d::mc
