// Groups a handful of city values, fits the K-S relation and maps the result
// onto a Beta law.
#include <iostream>

#include "kslab/beta.hpp"
#include "kslab/ksfit.hpp"
#include "kslab/moments.hpp"
#include "kslab/synthetic.hpp"

int main()
{
    using namespace kslab;

    const auto data = synthetic::grouped_lognormal({.groups = 60, .seed = 42});
    const auto cloud = group_sk_points(data, 4);
    std::cout << "groups with an (S, K) point: " << cloud.points.size() << "\n";

    const auto quad = fit_quadratic(cloud.points);
    std::cout << "K = " << quad.p << " S^2 + " << quad.q << "  (R2 " << quad.r_squared << ")\n";

    const auto power = fit_power(cloud.points);
    std::cout << "K = " << power.p << " S^" << power.nu << " + " << power.q << "\n";

    double mean_s = 0.0;
    for (const auto& p : cloud.points) mean_s += p.s;
    mean_s /= static_cast<double>(cloud.points.size());
    try {
        const auto cal = calibrate_from_sk(mean_s, quad.p * mean_s * mean_s + quad.q);
        std::cout << "Beta(a, b) = (" << cal.selected.a << ", " << cal.selected.b << "), rho " << cal.rho << "\n";
    } catch (const Error& e) {
        std::cout << "moments are not Beta-representable: " << e.what() << "\n";
    }
}
