#include "nmfg/layout.hpp"

namespace nmfg {

UnknownLayout::Entry UnknownLayout::decode(std::size_t index) const {
    const std::size_t stride = class_stride();
    const int j = static_cast<int>(index / stride);
    std::size_t rem = index % stride;
    const std::size_t nxs = static_cast<std::size_t>(nx);
    Entry e{};
    e.class_index = j;
    const std::size_t slot = rem / nxs;
    e.cell = static_cast<int>(rem % nxs);
    if (slot < static_cast<std::size_t>(nt)) {
        e.field = Field::U;
        e.time = static_cast<int>(slot);
    } else if (slot < static_cast<std::size_t>(2 * nt + 1)) {
        e.field = Field::Rho;
        e.time = static_cast<int>(slot) - nt;
    } else {
        e.field = Field::V;
        e.time = nt - (static_cast<int>(slot) - (2 * nt + 1));
    }
    return e;
}

std::string UnknownLayout::row_block_name(std::size_t row) const {
    const Entry e = decode(row);
    const std::string cls = " rows, class " + std::to_string(e.class_index + 1);
    switch (e.field) {
        case Field::U: return "feedback" + cls;
        case Field::Rho: return (e.time == 0 ? "initial-condition" : "continuity") + cls;
        case Field::V: return (e.time == nt ? "terminal" : "hjb") + cls;
    }
    return "unknown block";
}

}  // namespace nmfg
