"""One carried-traffic target, two very different operating points.

With retrials and no waiting room the carried traffic peaks at an interior
load; below that peak every target is reached both by a lightly and by a
heavily loaded system.
"""

import math

from qedstaff import Bernoulli
from qedstaff.bistability import L_max, figure2_data, gamma_hat, gamma_hat_inf, solve_problem3, solve_problem4


def main():
    print("maximiser of the carried traffic in QED units")
    for s in (1, 10, 100, 550):
        print(f"  s={s:<4} gamma_hat={gamma_hat(s):.6f}")
    print(f"  limit     {gamma_hat_inf():.9f}")

    s = 100
    top = math.sqrt(s) * L_max(s)
    print(f"\ns={s}: largest carried traffic with retrials is {top:.4f}")
    for frac in (0.5, 0.9, 1.0, 1.05):
        res = solve_problem4(s, frac * top)
        loads = ", ".join(f"{lam:.3f}" for lam in res.solutions) or "none"
        print(f"  target {frac:.2f} x peak -> {res.solution_count} load(s): {loads}")

    # without retrials, partial admission to a queue also gives two roots
    res = solve_problem3(10, 1.0, Bernoulli(0.3), "DF")
    loads = ", ".join(f"{lam:.4f}" for lam in res.solutions)
    print(f"\ns=10 bernoulli:0.3, carried traffic 1.0 (no retrials) reached at loads {loads}")

    print("\nscaled curve L_s(delta sqrt(s))/sqrt(s) at delta=0.5")
    for s in (1, 5, 10, 50, 100):
        value = dict(figure2_data(s, 3))[0.5]
        print(f"  s={s:<4} {value:.4f}   (1 - delta = 0.5)")


if __name__ == "__main__":
    main()
