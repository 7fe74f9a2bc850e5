#include "plasma/field.hpp"

#include <algorithm>
#include <cmath>

namespace plasma {

double ScalarField::interp(Point p) const {
    const Grid& g = dom->grid;
    double fx = (p.x - g.x0) / g.h;
    double fy = (p.y - g.y0) / g.h;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
    double tx = std::clamp(fx - i, 0.0, 1.0);
    double ty = std::clamp(fy - j, 0.0, 1.0);
    double v00 = at(i, j), v10 = at(i + 1, j);
    double v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 +
           tx * ty * v11;
}

double five_point_laplacian(const ScalarField& f, int i, int j) {
    const Grid& g = f.dom->grid;
    return (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) -
            4.0 * f.at(i, j)) /
           (g.h * g.h);
}

} // namespace plasma
