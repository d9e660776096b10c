"""How many customers can 100 agents carry at a given rejection target?

Compares the exact staffing level with the square-root rule and its
refinement, for a few admission policies, then shows how the gaps behave
as the system grows.
"""

from qedstaff import Bernoulli, Loss, StaffingProblem, Threshold, staff_refined
from qedstaff.staffing import gap_scan

SERVERS = 100
TARGET = 0.02  # sqrt(s) times the rejection probability


def main():
    print(f"s={SERVERS}, target sqrt(s)*D_F^R = {TARGET}")
    print(f"{'policy':<16}{'exact':>10}{'sqrt rule':>12}{'refined':>10}{'at refined':>12}")
    for policy in (Loss(), Bernoulli(0.1), Bernoulli(0.5), Threshold(3)):
        sol = staff_refined(StaffingProblem(SERVERS, TARGET, policy))
        print(f"{str(policy):<16}{sol.lambda_opt:>10.3f}{sol.lambda_star:>12.3f}"
              f"{sol.lambda_bullet:>10.3f}{sol.achieved_bullet:>12.4f}")

    # the square-root rule stays off by a constant, the refined rule catches up
    print("\ngaps for bernoulli:0.1")
    print(f"{'s':>6}{'exact - sqrt rule':>20}{'exact - refined':>18}")
    for row in gap_scan(Bernoulli(0.1), TARGET, "DFR", False, [25, 100, 400, 1600]):
        print(f"{row.s:>6}{row.gap_star:>20.4f}{row.gap_bullet:>18.4f}")


if __name__ == "__main__":
    main()
