"""Rejected customers come back: how much extra load do they add?

Solves the retrial rate for a range of primary loads, compares it with the
large-system limit, and staffs a system where retrials count.
"""

import math

from qedstaff import Bernoulli, Loss, StaffingProblem, solve_cohen, staff_refined
from qedstaff.retrials import solve_a_inf


def main():
    # one server, pure loss: the retrial rate equals the primary load at 0.5
    print("s=1 loss, lambda=0.5 -> omega =", solve_cohen(1, 0.5, Loss()).omega)

    policy = Bernoulli(0.1)
    print(f"\n{'s':>6}{'gamma':>7}{'omega/sqrt(s)':>15}{'limit':>9}")
    for s in (25, 100, 400, 1600):
        for gamma in (0.5, 1.5):
            lam = s - gamma * math.sqrt(s)
            sol = solve_cohen(s, lam, policy)
            print(f"{s:>6}{gamma:>7.1f}{sol.a:>15.5f}{solve_a_inf(gamma):>9.5f}")

    print("\nstaffing with retrials, s=100, bernoulli:0.1")
    for eps in (0.01, 0.05, 0.10):
        with_r = staff_refined(StaffingProblem(100, eps, policy, retrials=True))
        without = staff_refined(StaffingProblem(100, eps, policy))
        print(f"eps={eps:.2f}  exact {with_r.lambda_opt:.3f} (no retrials {without.lambda_opt:.3f})"
              f"  refined {with_r.lambda_bullet:.3f}")


if __name__ == "__main__":
    main()
