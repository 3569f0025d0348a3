#include "adiabatic/acceptance.hpp"

#include <cstdio>

int main()
{
    namespace acc = adiabatic::acceptance;
    const auto checks = acc::all_criteria();
    int failed = 0;
    for(std::size_t i = 0; i < checks.size(); ++i)
    {
        const auto r = acc::run_guarded(checks[i], static_cast<int>(i + 1));
        std::printf("%s\n", acc::format_line(r).c_str());
        std::fflush(stdout);
        failed += r.passed ? 0 : 1;
    }
    std::printf("%zu/%zu criteria passed\n", checks.size() - static_cast<std::size_t>(failed), checks.size());
    return failed == 0 ? 0 : 1;
}
