#include "net.hpp"

namespace autotuner {

std::array<ConvSpec, 6> table1_specs() {
    return {{
        {3, 128, 5, 5, 1, 2, 2, 2},
        {128, 64, 5, 5, 1, 2, 2, 2},
        {64, 64, 3, 3, 2, 2, 1, 1},
        {64, 64, 3, 3, 1, 1, 1, 1},
        {64, 8, 48, 1, 1, 1, 24, 1},
        {8, 1, 1, 1, 1, 1, 0, 0},
    }};
}

std::vector<std::string> parameter_names() {
    std::vector<std::string> names;
    for (int l = 1; l <= 6; ++l) {
        names.push_back("conv" + std::to_string(l) + ".w");
        names.push_back("conv" + std::to_string(l) + ".b");
    }
    for (const char* g : {"gru.wz", "gru.wr", "gru.wh", "gru.uz", "gru.ur",
                          "gru.uh", "gru.bz", "gru.br", "gru.bh"})
        names.push_back(g);
    names.push_back("dense.w");
    names.push_back("dense.b");
    return names;
}

}  // namespace autotuner
